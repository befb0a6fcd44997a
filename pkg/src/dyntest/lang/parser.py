"""Lexer and recursive-descent parser for the subject language (``.dyn``).

The grammar is documented in ``docs/language.md``. Blocks use braces;
newlines terminate simple statements. A colon followed by a single simple
statement is accepted as a one-line block (``def f(x): return x``).
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from typing import List, Optional, Tuple

from dyntest.lang import nodes as n

KEYWORDS = {
    "def", "class", "if", "elif", "else", "while", "return", "pass", "raise",
    "and", "or", "not", "in", "is", "True", "False", "None",
}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<comment>\#[^\n]*)
  | (?P<newline>\n)
  | (?P<float>(?:\d+\.\d*(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+|\.\d+(?:[eE][+-]?\d+)?))
  | (?P<int>\d+)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>==|!=|<=|>=|->|[-+*/%<>=(){}.,:;])
    """,
    re.VERBOSE,
)


class ParseError(Exception):
    """Malformed subject-language source, with a 1-based line/column."""

    def __init__(self, message: str, line: int, col: int) -> None:
        super().__init__(f"{line}:{col}: {message}")
        self.message = message
        self.line = line
        self.col = col


@dataclass(frozen=True)
class Token:
    kind: str  # int float string name keyword op newline eof
    text: str
    line: int
    col: int
    value: object = None


def tokenize(source: str) -> List[Token]:
    tokens: List[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(source):
        m = _TOKEN_RE.match(source, pos)
        col = pos - line_start + 1
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, col)
        kind = m.lastgroup
        text = m.group()
        pos = m.end()
        if kind in ("ws", "comment"):
            continue
        if kind == "newline":
            tokens.append(Token("newline", text, line, col))
            line += 1
            line_start = pos
            continue
        value: object = None
        if kind == "int":
            value = int(text)
        elif kind == "float":
            value = float(text)
        elif kind == "string":
            try:
                value = json.loads(text)
            except json.JSONDecodeError as exc:
                raise ParseError(f"bad string literal: {exc.msg}", line, col) from None
        elif kind == "name" and text in KEYWORDS:
            kind = "keyword"
        tokens.append(Token(kind, text, line, col, value))
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


_COMPARE_OPS = {"==", "!=", "<", "<=", ">", ">="}


class _Parser:
    def __init__(self, tokens: List[Token]) -> None:
        self.toks = tokens
        self.i = 0
        self.paren = 0

    # -- token helpers -----------------------------------------------------

    def peek(self, skip_newlines: bool = False) -> Token:
        i = self.i
        if skip_newlines or self.paren:
            while self.toks[i].kind == "newline":
                i += 1
        return self.toks[i]

    def next(self) -> Token:
        if self.paren:
            self.skip_newlines()
        tok = self.toks[self.i]
        self.i += 1
        return tok

    def skip_newlines(self) -> None:
        while self.toks[self.i].kind == "newline":
            self.i += 1

    def at(self, text: str, skip_newlines: bool = False) -> bool:
        tok = self.peek(skip_newlines)
        return tok.kind in ("op", "keyword") and tok.text == text

    def error(self, message: str, tok: Optional[Token] = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.col)

    def expect(self, text: str) -> Token:
        tok = self.peek()
        if tok.kind not in ("op", "keyword") or tok.text != text:
            found = tok.text or tok.kind
            raise self.error(f"expected {text!r}, found {found!r}")
        return self.next()

    def expect_name(self) -> Token:
        tok = self.peek()
        if tok.kind != "name":
            raise self.error(f"expected identifier, found {tok.text or tok.kind!r}")
        return self.next()

    # -- module level ------------------------------------------------------

    def module(self, name: str) -> n.ModuleAST:
        items: List[n.TopLevel] = []
        self.skip_newlines()
        while self.peek().kind != "eof":
            if self.at("def"):
                items.append(self.funcdef())
            elif self.at("class"):
                items.append(self.classdef())
            else:
                items.append(self.statement())
            self.skip_newlines()
        _check_unique(
            [(d.name, d.pos) for d in items if isinstance(d, (n.FunctionDef, n.ClassDef))],
            "definition",
        )
        return n.ModuleAST(name, tuple(items))

    def classdef(self) -> n.ClassDef:
        start = self.expect("class")
        name = self.expect_name().text
        self.skip_newlines()
        self.expect("{")
        methods: List[n.FunctionDef] = []
        self.skip_newlines()
        while not self.at("}"):
            if not self.at("def"):
                raise self.error("only method definitions are allowed in a class body")
            m = self.funcdef()
            if not m.params or m.params[0].name != "self":
                raise ParseError(
                    f"method {m.name!r} must take 'self' as its first parameter", *m.pos
                )
            if m.params[0].annotation is not None:
                raise ParseError("'self' cannot be annotated", *m.params[0].pos)
            methods.append(m)
            self.skip_newlines()
        self.expect("}")
        _check_unique([(m.name, m.pos) for m in methods], f"method in class {name!r}")
        return n.ClassDef(name, tuple(methods), pos=(start.line, start.col))

    def funcdef(self) -> n.FunctionDef:
        start = self.expect("def")
        name = self.expect_name().text
        self.expect("(")
        self.paren += 1
        params: List[n.Param] = []
        while not self.at(")"):
            tok = self.expect_name()
            ann = None
            if self.at(":"):
                self.next()
                ann = self.type_name()
            params.append(n.Param(tok.text, ann, pos=(tok.line, tok.col)))
            if not self.at(")"):
                self.expect(",")
        self.paren -= 1
        self.expect(")")
        returns = None
        if self.at("->"):
            self.next()
            returns = self.type_name()
        _check_unique([(p.name, p.pos) for p in params], f"parameter of {name!r}")
        body = self.block()
        return n.FunctionDef(name, tuple(params), returns, body, pos=(start.line, start.col))

    def type_name(self) -> str:
        tok = self.peek()
        if tok.kind == "name" or (tok.kind == "keyword" and tok.text == "None"):
            self.next()
            return tok.text
        raise self.error("expected a type name")

    # -- statements --------------------------------------------------------

    def block(self) -> Tuple[n.Stmt, ...]:
        if self.at(":"):
            self.next()
            self.skip_newlines()
            return (self.simple_statement(),)
        self.skip_newlines()
        self.expect("{")
        body: List[n.Stmt] = []
        self.skip_newlines()
        while not self.at("}"):
            if self.peek().kind == "eof":
                raise self.error("unterminated block, expected '}'")
            body.append(self.statement())
            self.skip_newlines()
        self.expect("}")
        return tuple(body)

    def statement(self) -> n.Stmt:
        tok = self.peek()
        if self.at("if"):
            return self.if_stmt()
        if self.at("while"):
            self.next()
            test = self.expr()
            return n.While(test, self.block(), pos=(tok.line, tok.col))
        if self.at("def") or self.at("class"):
            raise self.error("nested definitions are not supported")
        return self.simple_statement()

    def if_stmt(self) -> n.If:
        tok = self.next()  # 'if' or 'elif'
        test = self.expr()
        body = self.block()
        orelse: Tuple[n.Stmt, ...] = ()
        if self.at("elif", skip_newlines=True):
            self.skip_newlines()
            orelse = (self.if_stmt(),)
        elif self.at("else", skip_newlines=True):
            self.skip_newlines()
            self.next()
            orelse = self.block()
        return n.If(test, body, orelse, pos=(tok.line, tok.col))

    def simple_statement(self) -> n.Stmt:
        tok = self.peek()
        pos = (tok.line, tok.col)
        stmt: n.Stmt
        if self.at("return"):
            self.next()
            value = None if self._at_terminator() else self.expr()
            stmt = n.Return(value, pos=pos)
        elif self.at("pass"):
            self.next()
            stmt = n.Pass(pos=pos)
        elif self.at("raise"):
            self.next()
            kind = self.expect_name().text
            message = None
            if self.at("("):
                self.next()
                self.paren += 1
                if not self.at(")"):
                    message = self.expr()
                self.paren -= 1
                self.expect(")")
            stmt = n.Raise(kind, message, pos=pos)
        else:
            target = self.expr()
            if self.at("="):
                self.next()
                value = self.expr()
                if isinstance(target, n.Name):
                    if target.id == "self":
                        raise ParseError("cannot assign to 'self'", *pos)
                    stmt = n.Assign(target.id, value, pos=pos)
                elif isinstance(target, n.SelfAttr):
                    stmt = n.AttrAssign(target.attr, value, pos=pos)
                else:
                    raise ParseError("invalid assignment target", *pos)
            else:
                stmt = n.ExprStmt(target, pos=pos)
        if not self._at_terminator():
            raise self.error(f"expected end of statement, found {self.peek().text!r}")
        if self.at(";"):
            self.next()
        return stmt

    def _at_terminator(self) -> bool:
        tok = self.peek()
        return tok.kind in ("newline", "eof") or (
            tok.kind == "op" and tok.text in ("}", ";")
        )

    # -- expressions -------------------------------------------------------

    def expr(self) -> n.Expr:
        return self.or_expr()

    def or_expr(self) -> n.Expr:
        left = self.and_expr()
        while self.at("or"):
            tok = self.next()
            left = n.BoolOp("or", left, self.and_expr(), pos=(tok.line, tok.col))
        return left

    def and_expr(self) -> n.Expr:
        left = self.not_expr()
        while self.at("and"):
            tok = self.next()
            left = n.BoolOp("and", left, self.not_expr(), pos=(tok.line, tok.col))
        return left

    def not_expr(self) -> n.Expr:
        if self.at("not"):
            tok = self.next()
            return n.UnaryOp("not", self.not_expr(), pos=(tok.line, tok.col))
        return self.comparison()

    def comparison(self) -> n.Expr:
        left = self.arith()
        op = self._compare_op()
        if op is None:
            return left
        tok = self.peek()
        right = self.arith()
        if self._compare_op(consume=False) is not None:
            raise self.error("chained comparisons are not supported")
        return n.Compare(op, left, right, pos=(tok.line, tok.col))

    def _compare_op(self, consume: bool = True) -> Optional[str]:
        tok = self.peek()
        if tok.kind == "op" and tok.text in _COMPARE_OPS:
            if consume:
                self.next()
            return tok.text
        if tok.kind == "keyword":
            if tok.text == "in":
                if consume:
                    self.next()
                return "in"
            if tok.text == "is":
                if consume:
                    self.next()
                    if self.at("not"):
                        self.next()
                        return "is not"
                return "is"
            if tok.text == "not":
                j = self.i + 1
                while self.paren and self.toks[j].kind == "newline":
                    j += 1
                nxt = self.toks[j]
                if nxt.kind == "keyword" and nxt.text == "in":
                    if consume:
                        self.next()
                        self.next()
                    return "not in"
        return None

    def arith(self) -> n.Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            tok = self.next()
            left = n.BinOp(tok.text, left, self.term(), pos=(tok.line, tok.col))
        return left

    def term(self) -> n.Expr:
        left = self.unary()
        while self.at("*") or self.at("/") or self.at("%"):
            tok = self.next()
            left = n.BinOp(tok.text, left, self.unary(), pos=(tok.line, tok.col))
        return left

    def unary(self) -> n.Expr:
        if self.at("-"):
            tok = self.next()
            literal = self.peek().kind in ("int", "float")
            operand = self.unary()
            if (
                literal
                and isinstance(operand, n.Const)
                and type(operand.value) in (int, float)
                and not _is_negative(operand.value)
            ):
                # negative numeric literals are single constants
                return n.Const(-operand.value, pos=(tok.line, tok.col))
            return n.UnaryOp("-", operand, pos=(tok.line, tok.col))
        return self.postfix()

    def postfix(self) -> n.Expr:
        node = self.primary()
        while self.at("."):
            self.next()
            attr = self.expect_name()
            if self.at("("):
                args = self.call_args()
                node = n.MethodCall(node, attr.text, args, pos=(attr.line, attr.col))
            elif isinstance(node, n.Name) and node.id == "self":
                node = n.SelfAttr(attr.text, pos=(attr.line, attr.col))
            else:
                raise ParseError(
                    "attribute reads are only supported on 'self'", attr.line, attr.col
                )
        return node

    def call_args(self) -> Tuple[n.Expr, ...]:
        self.expect("(")
        self.paren += 1
        args: List[n.Expr] = []
        while not self.at(")"):
            args.append(self.expr())
            if not self.at(")"):
                self.expect(",")
        self.paren -= 1
        self.expect(")")
        return tuple(args)

    def primary(self) -> n.Expr:
        tok = self.peek()
        pos = (tok.line, tok.col)
        if tok.kind in ("int", "float", "string"):
            self.next()
            return n.Const(tok.value, pos=pos)
        if tok.kind == "keyword" and tok.text in ("True", "False", "None"):
            self.next()
            return n.Const({"True": True, "False": False, "None": None}[tok.text], pos=pos)
        if tok.kind == "name":
            self.next()
            if self.at("("):
                return n.Call(tok.text, self.call_args(), pos=pos)
            return n.Name(tok.text, pos=pos)
        if self.at("("):
            self.next()
            self.paren += 1
            inner = self.expr()
            self.paren -= 1
            self.expect(")")
            return inner
        raise self.error(f"unexpected {tok.text or tok.kind!r}")


def _is_negative(x: float) -> bool:
    return x < 0 or (x == 0 and str(x).startswith("-"))


def _check_unique(names: List[Tuple[str, n.Pos]], what: str) -> None:
    seen = set()
    for name, pos in names:
        if name in seen:
            raise ParseError(f"duplicate {what} {name!r}", *pos)
        seen.add(name)


def parse_module(source: str, name: str = "module") -> n.ModuleAST:
    """Parse subject-language source text into a :class:`ModuleAST`.

    Raises :class:`ParseError` (with line and column) on malformed input.
    """
    try:
        return _Parser(tokenize(source)).module(name)
    except RecursionError:
        raise ParseError("input nested too deeply", 1, 1) from None


def parse_expression(source: str) -> n.Expr:
    p = _Parser(tokenize(source))
    e = p.expr()
    p.skip_newlines()
    if p.peek().kind != "eof":
        raise p.error("trailing input after expression")
    return e
