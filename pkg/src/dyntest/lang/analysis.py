"""Static information extracted from a parsed module: callable signatures,
declared types, and the literal constant pool used for seeding."""
from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import FrozenSet, Iterator, Optional, Tuple

from dyntest.lang import nodes as n

log = logging.getLogger(__name__)


@dataclass(frozen=True, order=True)
class TypeRef:
    """A declared or inferred type.

    ``kind`` is one of ``int float bool str none class any unknown``; for
    ``class`` the class name is held in ``name``.
    """

    kind: str
    name: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == "class":
            return str(self.name)
        return _KIND_TO_TEXT[self.kind]

    @property
    def is_primitive(self) -> bool:
        return self.kind in PRIMITIVE_KINDS

    @property
    def is_concrete(self) -> bool:
        return self.kind not in ("any", "unknown")


PRIMITIVE_KINDS = ("int", "float", "bool", "str", "none")
_KIND_TO_TEXT = {
    "int": "int", "float": "float", "bool": "bool", "str": "str",
    "none": "None", "any": "Any", "unknown": "?",
}
_TEXT_TO_KIND = {v: k for k, v in _KIND_TO_TEXT.items() if k != "unknown"}

INT = TypeRef("int")
FLOAT = TypeRef("float")
BOOL = TypeRef("bool")
STR = TypeRef("str")
NONE = TypeRef("none")
ANY = TypeRef("any")
UNKNOWN = TypeRef("unknown")


def class_type(name: str) -> TypeRef:
    return TypeRef("class", name)


def type_of_value(value) -> TypeRef:
    """TypeRef of a primitive Python value (bool checked before int)."""
    if value is None:
        return NONE
    if type(value) is bool:
        return BOOL
    if type(value) is int:
        return INT
    if type(value) is float:
        return FLOAT
    if type(value) is str:
        return STR
    raise TypeError(f"not a primitive: {value!r}")


@dataclass(frozen=True)
class CallableSig:
    kind: str  # constructor | method | function
    owner: Optional[str]
    name: str
    params: Tuple[Tuple[str, TypeRef], ...]
    returns: TypeRef

    @property
    def qualname(self) -> str:
        return f"{self.owner}.{self.name}" if self.owner and self.kind == "method" else self.name


@dataclass(frozen=True)
class CallablePool:
    entries: Tuple[CallableSig, ...] = ()

    def __iter__(self) -> Iterator[CallableSig]:
        return iter(self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    @property
    def classes(self) -> Tuple[str, ...]:
        return tuple(e.owner for e in self.entries if e.kind == "constructor")

    def constructor(self, cls: str) -> Optional[CallableSig]:
        for e in self.entries:
            if e.kind == "constructor" and e.owner == cls:
                return e
        return None

    def function(self, name: str) -> Optional[CallableSig]:
        for e in self.entries:
            if e.kind == "function" and e.name == name:
                return e
        return None

    def methods_of(self, cls: str) -> Tuple[CallableSig, ...]:
        return tuple(e for e in self.entries if e.kind == "method" and e.owner == cls)

    def method(self, cls: str, name: str) -> Optional[CallableSig]:
        for e in self.methods_of(cls):
            if e.name == name:
                return e
        return None

    def type_set(self) -> Tuple[TypeRef, ...]:
        """Concrete types available in the module: primitives plus every class,
        together with anything named in a signature. Sorted for determinism."""
        found = {INT, FLOAT, BOOL, STR}
        for e in self.entries:
            if e.kind == "constructor":
                found.add(class_type(e.owner))
            for _, t in e.params:
                if t.is_concrete:
                    found.add(t)
            if e.returns.is_concrete:
                found.add(e.returns)
        return tuple(sorted(found))

    def erased(self) -> "CallablePool":
        """Same pool with every declared type replaced by Unknown
        (constructors still return their class)."""
        return CallablePool(
            tuple(
                replace(
                    e,
                    params=tuple((p, UNKNOWN) for p, _ in e.params),
                    returns=e.returns if e.kind == "constructor" else UNKNOWN,
                )
                for e in self.entries
            )
        )


@dataclass(frozen=True)
class ConstantPool:
    ints: FrozenSet[int] = field(default_factory=frozenset)
    floats: FrozenSet[float] = field(default_factory=frozenset)
    strings: FrozenSet[str] = field(default_factory=frozenset)

    def __bool__(self) -> bool:
        return bool(self.ints or self.floats or self.strings)

    def values_for(self, t: TypeRef) -> Tuple:
        """Sorted constants usable for a primitive type (empty if none)."""
        if t.kind == "int":
            return tuple(sorted(self.ints))
        if t.kind == "float":
            return tuple(sorted(self.floats))
        if t.kind == "str":
            return tuple(sorted(self.strings))
        return ()


def _resolve(annotation: Optional[str], classes: FrozenSet[str], where: str) -> TypeRef:
    if annotation is None:
        return UNKNOWN
    if annotation in _TEXT_TO_KIND:
        return TypeRef(_TEXT_TO_KIND[annotation])
    if annotation in classes:
        return class_type(annotation)
    log.warning("unresolvable annotation %r in %s; treating as unknown", annotation, where)
    return UNKNOWN


def _public(name: str) -> bool:
    return not name.startswith("_")


def collect_signatures(ast: n.ModuleAST, use_annotations: bool = True) -> CallablePool:
    """One entry per public function, class constructor and public method.

    With ``use_annotations`` off, every declared type is Unknown. Constructors
    return ``Class(name)`` in both modes, since the constructed type is not
    an annotation.
    """
    classes = frozenset(c.name for c in ast.classes)
    entries = []

    def sig(kind, owner, d: n.FunctionDef, params) -> CallableSig:
        where = f"{owner}.{d.name}" if owner else d.name
        if use_annotations:
            ps = tuple((p.name, _resolve(p.annotation, classes, where)) for p in params)
            ret = _resolve(d.returns, classes, where)
        else:
            ps = tuple((p.name, UNKNOWN) for p in params)
            ret = UNKNOWN
        return CallableSig(kind, owner, d.name, ps, ret)

    for item in ast.top_level:
        if isinstance(item, n.FunctionDef) and _public(item.name):
            entries.append(sig("function", None, item, item.params))
        elif isinstance(item, n.ClassDef) and _public(item.name):
            ctor = item.constructor
            if ctor is None:
                entries.append(CallableSig("constructor", item.name, item.name, (), class_type(item.name)))
            else:
                s = sig("constructor", item.name, ctor, ctor.params[1:])
                entries.append(replace(s, name=item.name, returns=class_type(item.name)))
            for m in item.methods:
                if m.name != "init" and _public(m.name):
                    entries.append(sig("method", item.name, m, m.params[1:]))
    return CallablePool(tuple(entries))


def iter_literals(ast: n.ModuleAST) -> Iterator:
    """Yield every literal value (int/float/str/bool/None) in source order."""

    def expr(e) -> Iterator:
        if isinstance(e, n.Const):
            yield e.value
        elif isinstance(e, (n.BinOp, n.BoolOp, n.Compare)):
            yield from expr(e.left)
            yield from expr(e.right)
        elif isinstance(e, n.UnaryOp):
            yield from expr(e.operand)
        elif isinstance(e, n.Call):
            for a in e.args:
                yield from expr(a)
        elif isinstance(e, n.MethodCall):
            yield from expr(e.receiver)
            for a in e.args:
                yield from expr(a)

    def stmt(s) -> Iterator:
        if isinstance(s, (n.Assign, n.AttrAssign, n.ExprStmt)):
            yield from expr(s.value)
        elif isinstance(s, n.Return) and s.value is not None:
            yield from expr(s.value)
        elif isinstance(s, n.Raise) and s.message is not None:
            yield from expr(s.message)
        elif isinstance(s, n.If):
            yield from expr(s.test)
            for b in s.body + s.orelse:
                yield from stmt(b)
        elif isinstance(s, n.While):
            yield from expr(s.test)
            for b in s.body:
                yield from stmt(b)

    for item in ast.top_level:
        if isinstance(item, n.FunctionDef):
            for s in item.body:
                yield from stmt(s)
        elif isinstance(item, n.ClassDef):
            for m in item.methods:
                for s in m.body:
                    yield from stmt(s)
        else:
            yield from stmt(item)


def collect_constants(ast: n.ModuleAST) -> ConstantPool:
    """Distinct int, float and string literals of the module (bools and None excluded)."""
    ints, floats, strings = set(), set(), set()
    for v in iter_literals(ast):
        t = type(v)
        if t is int:
            ints.add(v)
        elif t is float:
            floats.add(v)
        elif t is str:
            strings.add(v)
    return ConstantPool(frozenset(ints), frozenset(floats), frozenset(strings))
