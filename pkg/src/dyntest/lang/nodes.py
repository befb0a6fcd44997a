"""AST node types for the subject language.

Nodes are frozen dataclasses so that two parses of the same text compare
equal. Source positions are carried along but excluded from equality.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union

Pos = Tuple[int, int]


def _pos() -> Pos:
    return field(default=(0, 0), compare=False, repr=False)


# -- expressions -------------------------------------------------------------


@dataclass(frozen=True)
class Const:
    value: Union[int, float, bool, str, None]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Name:
    id: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class SelfAttr:
    """``self.attr`` read; attribute reads are only allowed on ``self``."""

    attr: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - * / %
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class UnaryOp:
    op: str  # "-" or "not"
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolOp:
    op: str  # "and" / "or"
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Compare:
    op: str  # == != < <= > >= is "is not" in "not in"
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    func: str
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class MethodCall:
    receiver: "Expr"
    name: str
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


Expr = Union[Const, Name, SelfAttr, BinOp, UnaryOp, BoolOp, Compare, Call, MethodCall]


# -- statements --------------------------------------------------------------


@dataclass(frozen=True)
class Assign:
    target: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class AttrAssign:
    attr: str
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Pass:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Raise:
    kind: str
    message: Optional[Expr]
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    test: Expr
    body: Tuple["Stmt", ...]
    orelse: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    test: Expr
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


Stmt = Union[Assign, AttrAssign, ExprStmt, Return, Pass, Raise, If, While]


# -- definitions -------------------------------------------------------------


@dataclass(frozen=True)
class Param:
    name: str
    annotation: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class FunctionDef:
    name: str
    params: Tuple[Param, ...]
    returns: Optional[str]
    body: Tuple[Stmt, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class ClassDef:
    name: str
    methods: Tuple[FunctionDef, ...]
    pos: Pos = _pos()

    @property
    def constructor(self) -> Optional[FunctionDef]:
        for m in self.methods:
            if m.name == "init":
                return m
        return None


TopLevel = Union[FunctionDef, ClassDef, Stmt]


@dataclass(frozen=True)
class ModuleAST:
    name: str
    top_level: Tuple[TopLevel, ...]

    @property
    def functions(self) -> Tuple[FunctionDef, ...]:
        return tuple(d for d in self.top_level if isinstance(d, FunctionDef))

    @property
    def classes(self) -> Tuple[ClassDef, ...]:
        return tuple(d for d in self.top_level if isinstance(d, ClassDef))

    @property
    def statements(self) -> Tuple[Stmt, ...]:
        return tuple(
            d for d in self.top_level if not isinstance(d, (FunctionDef, ClassDef))
        )
