"""Test cases as sequences of value-defining statements, and test suites.

Each statement defines exactly one variable, named by its position. Variable
references (``VarRef``) are plain statement indices and must point strictly
backwards. All containers are immutable; operators build new instances.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Iterable, List, Optional, Sequence, Tuple, Union

from dyntest.lang import nodes as n
from dyntest.lang.analysis import UNKNOWN, CallablePool, TypeRef, class_type, type_of_value
from dyntest.lang.parser import parse_module
from dyntest.lang.render import render_literal

VarRef = int
PrimitiveValue = Union[int, float, bool, str, None]


class Primitive:
    """``varN = <literal>``. Equality is type-aware, so 1, 1.0 and True differ."""

    __slots__ = ("value", "_key")

    def __init__(self, value: PrimitiveValue) -> None:
        if type(value) is float and value == 0.0:
            value = 0.0  # no negative zero; it would alias 0.0 in caches
        type_of_value(value)  # validates
        object.__setattr__(self, "value", value)
        object.__setattr__(self, "_key", (type(value).__name__, value))

    def __setattr__(self, name, value):
        raise AttributeError("Primitive is immutable")

    def __eq__(self, other) -> bool:
        return type(other) is Primitive and self._key == other._key

    def __hash__(self) -> int:
        return hash(self._key)

    def __repr__(self) -> str:
        return f"Primitive({self.value!r})"

    @property
    def refs(self) -> Tuple[VarRef, ...]:
        return ()


@dataclass(frozen=True)
class Constructor:
    cls: str
    args: Tuple[VarRef, ...] = ()

    @property
    def refs(self) -> Tuple[VarRef, ...]:
        return self.args


@dataclass(frozen=True)
class Method:
    receiver: VarRef
    name: str
    args: Tuple[VarRef, ...] = ()

    @property
    def refs(self) -> Tuple[VarRef, ...]:
        return (self.receiver,) + self.args


@dataclass(frozen=True)
class Function:
    name: str
    args: Tuple[VarRef, ...] = ()

    @property
    def refs(self) -> Tuple[VarRef, ...]:
        return self.args


Statement = Union[Primitive, Constructor, Method, Function]


def remap(stmt: Statement, fn: Callable[[VarRef], VarRef]) -> Statement:
    """Copy of ``stmt`` with every variable reference passed through ``fn``."""
    if isinstance(stmt, Primitive):
        return stmt
    if isinstance(stmt, Constructor):
        return Constructor(stmt.cls, tuple(fn(a) for a in stmt.args))
    if isinstance(stmt, Method):
        return Method(fn(stmt.receiver), stmt.name, tuple(fn(a) for a in stmt.args))
    return Function(stmt.name, tuple(fn(a) for a in stmt.args))


@dataclass(frozen=True)
class TestCase:
    statements: Tuple[Statement, ...] = ()

    __test__ = False  # not a pytest class

    def __hash__(self) -> int:
        # archives hash the same long tests many times
        h = self.__dict__.get("_hash")
        if h is None:
            h = hash(self.statements)
            object.__setattr__(self, "_hash", h)
        return h

    def __len__(self) -> int:
        return len(self.statements)

    def __getitem__(self, i: int) -> Statement:
        return self.statements[i]

    def __iter__(self):
        return iter(self.statements)


@dataclass(frozen=True)
class TestSuite:
    tests: Tuple[TestCase, ...] = ()

    __test__ = False

    def __len__(self) -> int:
        return len(self.tests)

    def __iter__(self):
        return iter(self.tests)


def testcase(*stmts: Statement) -> TestCase:
    return TestCase(tuple(stmts))


testcase.__test__ = False  # type: ignore[attr-defined]


# -- editing helpers shared by the search operators ---------------------------


def insert_statement(stmts: List[Statement], pos: int, stmt: Statement) -> None:
    """Insert in place at ``pos``, shifting later references to moved statements."""
    shift = lambda r: r + 1 if r >= pos else r  # noqa: E731
    for j in range(pos, len(stmts)):
        s = stmts[j]
        if any(r >= pos for r in s.refs):
            stmts[j] = remap(s, shift)
    stmts.insert(pos, stmt)


def delete_statement(stmts: Sequence[Statement], pos: int) -> List[Statement]:
    """Delete ``pos`` and, transitively, every statement that depends on it."""
    dead = {pos}
    for j in range(pos + 1, len(stmts)):
        if any(r in dead for r in stmts[j].refs):
            dead.add(j)
    mapping = {}
    out: List[Statement] = []
    for j, s in enumerate(stmts):
        if j in dead:
            continue
        mapping[j] = len(out)
        out.append(remap(s, mapping.__getitem__))
    return out


# -- typing ------------------------------------------------------------------


def inferred_type(t: TestCase, index: int, pool: CallablePool) -> TypeRef:
    """Static type of the variable defined by statement ``index``."""
    s = t.statements[index]
    if isinstance(s, Primitive):
        return type_of_value(s.value)
    if isinstance(s, Constructor):
        return class_type(s.cls)
    if isinstance(s, Function):
        sig = pool.function(s.name)
        return sig.returns if sig else UNKNOWN
    recv = inferred_type(t, s.receiver, pool)
    if recv.kind == "class":
        sig = pool.method(recv.name, s.name)
        if sig is not None:
            return sig.returns
    return UNKNOWN


# -- validation --------------------------------------------------------------


def validate(t: TestCase, max_length: Optional[int] = None, pool: Optional[CallablePool] = None) -> List[str]:
    """Structural diagnostics; an empty list means the test case is valid."""
    diags: List[str] = []
    if max_length is not None and len(t) > max_length:
        diags.append(f"size {len(t)} exceeds limit {max_length}")
    classes = set(pool.classes) if pool is not None else None
    for j, s in enumerate(t.statements):
        for r in s.refs:
            if not isinstance(r, int) or r < 0:
                diags.append(f"bad reference {r!r} at stmt {j}")
            elif r >= j:
                diags.append(f"use-before-def at stmt {j}")
        if pool is None:
            continue
        if isinstance(s, Constructor) and s.cls not in classes:
            diags.append(f"unknown class {s.cls!r} at stmt {j}")
        elif isinstance(s, Function) and pool.function(s.name) is None:
            diags.append(f"unknown function {s.name!r} at stmt {j}")
        elif isinstance(s, Method):
            if not any(e.kind == "method" and e.name == s.name for e in pool):
                diags.append(f"unknown method {s.name!r} at stmt {j}")
    return diags


# -- export ------------------------------------------------------------------


def _var(i: int) -> str:
    return f"var{i}"


def render_statement(s: Statement, index: int) -> str:
    if isinstance(s, Primitive):
        rhs = render_literal(s.value)
    elif isinstance(s, Constructor):
        rhs = f"{s.cls}({', '.join(map(_var, s.args))})"
    elif isinstance(s, Method):
        rhs = f"{_var(s.receiver)}.{s.name}({', '.join(map(_var, s.args))})"
    else:
        rhs = f"{s.name}({', '.join(map(_var, s.args))})"
    return f"{_var(index)} = {rhs}"


def render_testcase(t: TestCase, name: str) -> str:
    if not t.statements:
        return f"def {name}() {{ }}\n"
    body = "".join(f"    {render_statement(s, i)}\n" for i, s in enumerate(t.statements))
    return f"def {name}() {{\n{body}}}\n"


def render_suite(s: TestSuite, module_name: str) -> str:
    """Render a suite as a ``.dyn`` test file, one ``test_<i>`` function per case."""
    if len(s) == 0:
        raise ValueError("cannot render an empty test suite")
    header = f"# Generated tests for module {module_name}.\n"
    return header + "\n" + "\n".join(render_testcase(t, f"test_{i}") for i, t in enumerate(s.tests))


class TestFileError(ValueError):
    __test__ = False


def _ref(e: n.Expr, j: int) -> VarRef:
    if isinstance(e, n.Name) and e.id.startswith("var") and e.id[3:].isdigit():
        r = int(e.id[3:])
        if r < j:
            return r
    raise TestFileError(f"argument at line {e.pos[0]} is not an earlier variable")


def parse_test_file(source: str, classes: Iterable[str]) -> TestSuite:
    """Inverse of :func:`render_suite`. ``classes`` tells constructors apart
    from function calls."""
    classes = set(classes)
    module = parse_module(source, "tests")
    tests = []
    for d in module.top_level:
        if not isinstance(d, n.FunctionDef) or not d.name.startswith("test_"):
            raise TestFileError(f"unexpected top-level item {d!r}")
        stmts: List[Statement] = []
        for j, s in enumerate(d.body):
            if not isinstance(s, n.Assign) or s.target != _var(j):
                raise TestFileError(f"statement {j} of {d.name} is not 'var{j} = ...'")
            v = s.value
            if isinstance(v, n.Const):
                stmts.append(Primitive(v.value))
            elif isinstance(v, n.Call):
                args = tuple(_ref(a, j) for a in v.args)
                stmts.append(Constructor(v.func, args) if v.func in classes else Function(v.func, args))
            elif isinstance(v, n.MethodCall):
                stmts.append(Method(_ref(v.receiver, j), v.name, tuple(_ref(a, j) for a in v.args)))
            else:
                raise TestFileError(f"unsupported statement {j} in {d.name}")
        tests.append(TestCase(tuple(stmts)))
    return TestSuite(tuple(tests))
