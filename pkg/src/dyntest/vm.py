"""Instrumented stack VM: runs compiled code under a test case and traces
executed code objects and per-branch minimum distances."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, List, Optional, Tuple

from dyntest import compiler as c
from dyntest.compiler import Branch, CompiledModule
from dyntest.distance import (
    COMPLEMENT,
    DEFAULT_DISTANCE,
    DistanceConfig,
    _true_distance,
    subject_in,
    subject_is,
    truthy,
)
from dyntest.testcase import Constructor, Function, Method, Primitive, TestCase

DEFAULT_STEP_BUDGET = 100_000
MAX_CALL_DEPTH = 100
MODULE_LEVEL = -1  # statement index used when the module body itself raises


class EngineError(Exception):
    """Internal VM fault; never caused by the subject code misbehaving."""


class SubjectError(Exception):
    """An exception raised by subject code (or by its misuse of operators)."""

    def __init__(self, kind: str, message: str = "") -> None:
        super().__init__(f"{kind}: {message}")
        self.kind = kind
        self.message = message


class _BudgetExhausted(Exception):
    pass


class Obj:
    """Instance of a subject-language class. Equality is identity."""

    __slots__ = ("cls", "attrs")

    def __init__(self, cls: str) -> None:
        self.cls = cls
        self.attrs: Dict[str, object] = {}

    def __repr__(self) -> str:
        return f"<{self.cls} object>"


_UNBOUND = object()


@dataclass(frozen=True)
class ExceptionInfo:
    statement_index: int
    kind: str
    message: str


@dataclass(frozen=True)
class ExecutionResult:
    executed_code_objects: FrozenSet[int]
    # predicate id -> (min true-branch distance, min false-branch distance)
    predicate_distances: Dict[int, Tuple[float, float]] = field(hash=False)
    predicate_counts: Dict[int, int] = field(hash=False)
    exception: Optional[ExceptionInfo] = None
    steps_used: int = 0

    @property
    def distances(self) -> Dict[Branch, float]:
        out: Dict[Branch, float] = {}
        for pid, (dt, df) in sorted(self.predicate_distances.items()):
            out[Branch(pid, True)] = dt
            out[Branch(pid, False)] = df
        return out

    @property
    def covered_branches(self) -> FrozenSet[Branch]:
        return frozenset(b for b, d in self.distances.items() if d == 0)

    @property
    def passed(self) -> bool:
        return self.exception is None


def _describe(v) -> str:
    if isinstance(v, Obj):
        return v.cls
    if v is None:
        return "None"
    return type(v).__name__


def _numeric(v) -> bool:
    t = type(v)
    return t is int or t is float or t is bool


MAX_STRING = 100_000
MAX_INT_BITS = 4096


def _finite(x):
    # inf and nan would break the distance arithmetic
    if type(x) is float and not math.isfinite(x):
        raise SubjectError("OverflowError", "non-finite float result")
    return x


def _binary(op: str, a, b):
    return _finite(_arith(op, a, b))


def _arith(op: str, a, b):
    if op == "+":
        if type(a) is str and type(b) is str:
            if len(a) + len(b) > MAX_STRING:
                raise SubjectError("MemoryError", "string too long")
            return a + b
        if _numeric(a) and _numeric(b):
            return a + b
    elif _numeric(a) and _numeric(b):
        if op == "-":
            return a - b
        if op == "*":
            if type(a) is int and type(b) is int and a.bit_length() + b.bit_length() > MAX_INT_BITS:
                raise SubjectError("OverflowError", "integer result too large")
            return a * b
        if op == "/":
            if b == 0:
                raise SubjectError("ZeroDivisionError", "division by zero")
            return a / b
        if op == "%":
            if b == 0:
                raise SubjectError("ZeroDivisionError", "modulo by zero")
            return a % b
    raise SubjectError(
        "TypeError", f"unsupported operand types for {op}: {_describe(a)} and {_describe(b)}"
    )


def _compare(op: str, a, b) -> bool:
    if op == "==":
        return a == b
    if op == "!=":
        return a != b
    if op == "is":
        return subject_is(a, b)
    if op == "is not":
        return not subject_is(a, b)
    if op == "in" or op == "not in":
        if type(a) is not str or type(b) is not str:
            raise SubjectError("TypeError", f"'{op}' requires strings, got {_describe(a)} and {_describe(b)}")
        return subject_in(a, b) == (op == "in")
    if not ((_numeric(a) and _numeric(b)) or (type(a) is str and type(b) is str)):
        raise SubjectError("TypeError", f"'{op}' not supported between {_describe(a)} and {_describe(b)}")
    if op == "<":
        return a < b
    if op == "<=":
        return a <= b
    if op == ">":
        return a > b
    return a >= b


def _to_str(v) -> str:
    if isinstance(v, Obj):
        return f"<{v.cls} object>"
    return str(v)


def _builtin(name: str, args: list):
    if len(args) != 1:
        raise SubjectError("TypeError", f"{name}() takes exactly one argument ({len(args)} given)")
    (x,) = args
    if name == "len":
        if type(x) is not str:
            raise SubjectError("TypeError", f"object of type {_describe(x)} has no len()")
        return len(x)
    if name == "abs":
        if not _numeric(x):
            raise SubjectError("TypeError", f"bad operand type for abs(): {_describe(x)}")
        return abs(x)
    if name == "str":
        return _to_str(x)
    if name in ("int", "float"):
        if not (_numeric(x) or type(x) is str):
            raise SubjectError("TypeError", f"{name}() argument must be a number or string, not {_describe(x)}")
        try:
            return int(x) if name == "int" else _finite(float(x))
        except (ValueError, OverflowError) as exc:
            raise SubjectError(type(exc).__name__, str(exc)) from None
    raise EngineError(f"unknown builtin {name!r}")


class _Machine:
    def __init__(self, cm: CompiledModule, dcfg: DistanceConfig, budget: int) -> None:
        self.cm = cm
        self.k = dcfg.k
        self.budget = budget
        self.steps = 0
        self.depth = 0
        self.executed: set = set()
        self.dist: Dict[int, List[float]] = {}
        self.counts: Dict[int, int] = {}
        self.globals: Dict[str, object] = {}

    # -- tracing -------------------------------------------------------

    def _record(self, pid: int, dt: float, df: float) -> None:
        cur = self.dist.get(pid)
        if cur is None:
            self.dist[pid] = [dt, df]
            self.counts[pid] = 1
            return
        if dt < cur[0]:
            cur[0] = dt
        if df < cur[1]:
            cur[1] = df
        self.counts[pid] += 1

    # -- calls ---------------------------------------------------------

    def call_code(self, code_id: int, args: list):
        co = self.cm.code_objects[code_id]
        if len(args) != co.nparams:
            given = len(args) - (1 if co.kind in ("method", "constructor") else 0)
            want = co.nparams - (1 if co.kind in ("method", "constructor") else 0)
            raise SubjectError("TypeError", f"{co.name}() takes {want} arguments ({given} given)")
        if self.depth >= MAX_CALL_DEPTH:
            raise SubjectError("RecursionError", "maximum call depth exceeded")
        frame = args + [_UNBOUND] * (co.nlocals - co.nparams)
        self.depth += 1
        try:
            return self.run(co, frame)
        finally:
            self.depth -= 1

    def construct(self, cls: str, args: list):
        info = self.cm.classes.get(cls)
        if info is None:
            raise EngineError(f"unknown class {cls!r}")
        obj = Obj(cls)
        if info.constructor is None:
            if args:
                raise SubjectError("TypeError", f"{cls}() takes no arguments")
        else:
            self.call_code(info.constructor, [obj] + args)
        return obj

    def call_method(self, recv, name: str, args: list):
        if not isinstance(recv, Obj):
            raise SubjectError("AttributeError", f"{_describe(recv)} has no method {name!r}")
        code_id = self.cm.classes[recv.cls].methods.get(name)
        if code_id is None:
            raise SubjectError("AttributeError", f"{recv.cls} has no method {name!r}")
        return self.call_code(code_id, [recv] + args)

    # -- interpreter loop ----------------------------------------------

    def run(self, co, frame: list):
        self.executed.add(co.id)
        instrs = co.instructions
        stack: list = []
        push = stack.append
        pop = stack.pop
        pc = 0
        k = self.k
        budget = self.budget
        while True:
            self.steps += 1
            if self.steps > budget:
                raise _BudgetExhausted()
            op, a, b, tgt = instrs[pc]
            pc += 1
            if op == c.LOAD_LOCAL:
                v = frame[a]
                if v is _UNBOUND:
                    raise SubjectError("NameError", f"local {co.local_names[a]!r} referenced before assignment")
                push(v)
            elif op == c.CONST:
                push(a)
            elif op == c.STORE_LOCAL:
                frame[a] = pop()
            elif op == c.COMPARE_JUMP:
                rhs = pop()
                lhs = pop()
                cmp_op, pid = a
                res = _compare(cmp_op, lhs, rhs)
                if res:
                    self._record(pid, 0.0, _true_distance(COMPLEMENT[cmp_op], lhs, rhs, k))
                else:
                    self._record(pid, _true_distance(cmp_op, lhs, rhs, k), 0.0)
                if res == b:
                    pc = tgt
            elif op == c.TRUTHY_JUMP:
                res = truthy(pop())
                if res:
                    self._record(a, 0.0, k)
                else:
                    self._record(a, k, 0.0)
                if res == b:
                    pc = tgt
            elif op == c.JUMP:
                pc = tgt
            elif op == c.BINARY:
                rhs = pop()
                push(_binary(a, pop(), rhs))
            elif op == c.GET_ATTR:
                obj = pop()
                try:
                    push(obj.attrs[a])
                except KeyError:
                    raise SubjectError("AttributeError", f"{obj.cls} object has no attribute {a!r}") from None
            elif op == c.SET_ATTR:
                v = pop()
                pop().attrs[a] = v
            elif op == c.CALL_METHOD:
                args = stack[len(stack) - b:] if b else []
                del stack[len(stack) - b:]
                push(self.call_method(pop(), a, args))
            elif op == c.CALL_FUNCTION:
                args = stack[len(stack) - b:] if b else []
                del stack[len(stack) - b:]
                push(self.call_code(a, args))
            elif op == c.NEW:
                args = stack[len(stack) - b:] if b else []
                del stack[len(stack) - b:]
                push(self.construct(a, args))
            elif op == c.CALL_BUILTIN:
                args = stack[len(stack) - b:] if b else []
                del stack[len(stack) - b:]
                push(_builtin(a, args))
            elif op == c.RETURN:
                return pop()
            elif op == c.POP:
                pop()
            elif op == c.DUP:
                push(stack[-1])
            elif op == c.LOAD_GLOBAL:
                try:
                    push(self.globals[a])
                except KeyError:
                    raise SubjectError("NameError", f"name {a!r} is not defined") from None
            elif op == c.STORE_GLOBAL:
                self.globals[a] = pop()
            elif op == c.COMPARE:
                rhs = pop()
                push(_compare(a, pop(), rhs))
            elif op == c.NOT:
                push(not truthy(pop()))
            elif op == c.NEG:
                v = pop()
                if not _numeric(v):
                    raise SubjectError("TypeError", f"bad operand type for unary -: {_describe(v)}")
                push(-v)
            elif op == c.RAISE:
                msg = _to_str(pop()) if b else ""
                raise SubjectError(a, msg)
            else:
                raise EngineError(f"bad opcode {op} in {co.name}@{pc - 1}")

    # -- test statements -----------------------------------------------

    def run_statement(self, s, values: list):
        if isinstance(s, Primitive):
            return s.value
        if isinstance(s, Constructor):
            return self.construct(s.cls, [values[r] for r in s.args])
        if isinstance(s, Method):
            return self.call_method(values[s.receiver], s.name, [values[r] for r in s.args])
        if isinstance(s, Function):
            code_id = self.cm.functions.get(s.name)
            if code_id is None:
                raise EngineError(f"unknown function {s.name!r}")
            return self.call_code(code_id, [values[r] for r in s.args])
        raise EngineError(f"unknown statement {s!r}")


def _python_error(exc: Exception) -> SubjectError:
    return SubjectError(type(exc).__name__, str(exc))


def execute_test(
    cm: CompiledModule,
    t: TestCase,
    cfg: DistanceConfig = DEFAULT_DISTANCE,
    step_budget: int = DEFAULT_STEP_BUDGET,
) -> ExecutionResult:
    """Load the module in a fresh environment, then run ``t`` statement by statement.

    The first subject exception (or budget exhaustion) stops execution; every
    trace recorded before it is kept.
    """
    m = _Machine(cm, cfg, step_budget)
    exc: Optional[ExceptionInfo] = None
    index = MODULE_LEVEL
    try:
        m.run(cm.module_code, [])
        values: list = []
        for index, s in enumerate(t.statements):
            values.append(m.run_statement(s, values))
    except SubjectError as e:
        exc = ExceptionInfo(index, e.kind, e.message)
    except _BudgetExhausted:
        exc = ExceptionInfo(index, "BudgetExhausted", f"step budget of {step_budget} exhausted")
    except (ArithmeticError, ValueError) as e:
        # host arithmetic edge cases (e.g. float overflow) surface as subject errors
        se = _python_error(e)
        exc = ExceptionInfo(index, se.kind, se.message)
    except RecursionError:
        exc = ExceptionInfo(index, "RecursionError", "host recursion limit")
    except (EngineError, IndexError, KeyError, AttributeError, TypeError) as e:
        raise EngineError(f"internal VM fault: {e!r}") from e
    return ExecutionResult(
        executed_code_objects=frozenset(m.executed),
        predicate_distances={p: (d[0], d[1]) for p, d in m.dist.items()},
        predicate_counts=dict(m.counts),
        exception=exc,
        steps_used=min(m.steps, step_budget),
    )


class Executor:
    """Executes test cases against one compiled module, memoizing results."""

    def __init__(self, cm: CompiledModule, cfg: DistanceConfig = DEFAULT_DISTANCE,
                 step_budget: int = DEFAULT_STEP_BUDGET, cache_size: int = 20_000) -> None:
        self.cm = cm
        self.cfg = cfg
        self.step_budget = step_budget
        self.cache_size = cache_size
        self._cache: Dict[TestCase, ExecutionResult] = {}
        self.executions = 0
        self.baseline = self.execute(TestCase(()))

    def execute(self, t: TestCase) -> ExecutionResult:
        r = self._cache.get(t)
        if r is None:
            r = execute_test(self.cm, t, self.cfg, self.step_budget)
            self.executions += 1
            if len(self._cache) >= self.cache_size:
                self._cache.clear()
            self._cache[t] = r
        return r


def format_distance(d: float):
    """JSON-friendly distance: infinity is spelled ``"inf"``."""
    if math.isinf(d):
        return "inf"
    return d


def result_as_dict(r: ExecutionResult) -> dict:
    """Deterministic JSON-ready view of an execution result."""
    return {
        "executed_code_objects": sorted(r.executed_code_objects),
        "branch_distances": [
            {"predicate": b.predicate, "polarity": b.polarity, "distance": format_distance(d)}
            for b, d in r.distances.items()
        ],
        "predicate_counts": {str(p): c for p, c in sorted(r.predicate_counts.items())},
        "exception": None if r.exception is None else {
            "statement_index": r.exception.statement_index,
            "kind": r.exception.kind,
            "message": r.exception.message,
        },
        "steps_used": r.steps_used,
    }
