"""Compile a subject-language module into code objects for the stack VM.

Every atomic condition that decides a conditional jump gets its own
predicate site; ``and``/``or``/``not`` are compiled to nested jumps rather
than materialized booleans, so a condition with n atomic comparisons yields
n predicates and 2n branches.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, NamedTuple, Optional, Set, Tuple

from dyntest.lang import nodes as n
from dyntest.lang.analysis import CallablePool, ConstantPool, collect_constants, collect_signatures
from dyntest.lang.render import render_literal

# opcodes; instructions are 4-tuples (opcode, a, b, c)
CONST = 0
LOAD_LOCAL = 1
STORE_LOCAL = 2
LOAD_GLOBAL = 3
STORE_GLOBAL = 4
GET_ATTR = 5
SET_ATTR = 6
CALL_FUNCTION = 7
NEW = 8
CALL_METHOD = 9
CALL_BUILTIN = 10
BINARY = 11
NEG = 12
NOT = 13
COMPARE = 14
COMPARE_JUMP = 15  # a=(cmp_op, predicate id), b=jump when result is b, c=target
TRUTHY_JUMP = 16  # a=predicate id, b=jump when truthiness is b, c=target
JUMP = 17
POP = 18
DUP = 19
RETURN = 20
RAISE = 21

OPNAMES = {
    v: k
    for k, v in dict(globals()).items()
    if k.isupper() and isinstance(v, int) and not k.startswith("_")
}

BUILTINS = {"len": 1, "abs": 1, "str": 1, "int": 1, "float": 1}

COMPARE_OPS = ("==", "!=", "<", "<=", ">", ">=", "in", "not in", "is", "is not")
TRUTHY = "truthy"


class CompileError(Exception):
    def __init__(self, message: str, pos: Tuple[int, int] = (0, 0)) -> None:
        super().__init__(f"{pos[0]}:{pos[1]}: {message}")
        self.message = message
        self.pos = pos


@dataclass(frozen=True)
class PredicateSite:
    id: int
    arity: str  # "unary" | "binary"
    operator: str  # one of COMPARE_OPS, or "truthy" for unary predicates
    source_span: Tuple[int, int]
    code_object: int


class Branch(NamedTuple):
    predicate: int
    polarity: bool  # True = true-branch

    def __str__(self) -> str:
        return f"p{self.predicate}:{'true' if self.polarity else 'false'}"


@dataclass(frozen=True)
class CodeObject:
    id: int
    kind: str  # module | function | constructor | method
    name: str
    nparams: int  # including the receiver for methods/constructors
    nlocals: int
    local_names: Tuple[str, ...]
    instructions: Tuple[tuple, ...]
    predicates: Tuple[PredicateSite, ...]


@dataclass(frozen=True)
class ClassInfo:
    name: str
    constructor: Optional[int]  # code object id of init, if any
    methods: Dict[str, int] = field(hash=False)


@dataclass(frozen=True)
class CompiledModule:
    name: str
    code_objects: Tuple[CodeObject, ...]
    branches: Tuple[Branch, ...]
    pool: CallablePool
    constants: ConstantPool
    functions: Dict[str, int] = field(hash=False)
    classes: Dict[str, ClassInfo] = field(hash=False)
    predicates: Tuple[PredicateSite, ...] = ()
    untyped_pool: CallablePool = CallablePool()

    @property
    def module_code(self) -> CodeObject:
        return self.code_objects[0]

    def callable_pool(self, use_annotations: bool) -> CallablePool:
        return self.pool if use_annotations else self.untyped_pool


class _Label:
    __slots__ = ("target",)

    def __init__(self) -> None:
        self.target: Optional[int] = None


class _CodeBuilder:
    def __init__(self, mc: "_ModuleCompiler", code_id: int, kind: str, name: str,
                 params: List[str], locals_: Set[str], has_self: bool) -> None:
        self.mc = mc
        self.code_id = code_id
        self.kind = kind
        self.name = name
        self.has_self = has_self
        self.is_module = kind == "module"
        ordered = list(params) + sorted(locals_ - set(params))
        self.slots = {nm: i for i, nm in enumerate(ordered)}
        self.local_names = tuple(ordered)
        self.nparams = len(params)
        self.code: List[list] = []
        self.predicates: List[PredicateSite] = []

    def emit(self, op: int, a=None, b=None, c=None) -> None:
        self.code.append([op, a, b, c])

    def mark(self, label: _Label) -> None:
        label.target = len(self.code)

    def new_predicate(self, arity: str, operator: str, pos) -> int:
        pid = self.mc.next_predicate
        self.mc.next_predicate += 1
        site = PredicateSite(pid, arity, operator, tuple(pos), self.code_id)
        self.predicates.append(site)
        self.mc.predicates.append(site)
        return pid

    def finish(self) -> CodeObject:
        if not self.code or self.code[-1][0] != RETURN:
            self.emit(CONST, None)
            self.emit(RETURN)
        instrs = []
        for op, a, b, c in self.code:
            if isinstance(c, _Label):
                c = c.target
            instrs.append((op, a, b, c))
        return CodeObject(
            self.code_id, self.kind, self.name, self.nparams, len(self.slots),
            self.local_names, tuple(instrs), tuple(self.predicates),
        )

    # -- statements --------------------------------------------------------

    def stmts(self, body) -> None:
        for s in body:
            self.stmt(s)

    def stmt(self, s: n.Stmt) -> None:
        if isinstance(s, n.Assign):
            self.expr(s.value)
            if self.is_module:
                self.emit(STORE_GLOBAL, s.target)
            else:
                self.emit(STORE_LOCAL, self.slots[s.target])
        elif isinstance(s, n.AttrAssign):
            self._load_self(s.pos)
            self.expr(s.value)
            self.emit(SET_ATTR, s.attr)
        elif isinstance(s, n.ExprStmt):
            self.expr(s.value)
            self.emit(POP)
        elif isinstance(s, n.Return):
            if self.is_module:
                raise CompileError("'return' outside function", s.pos)
            if s.value is None:
                self.emit(CONST, None)
            else:
                self.expr(s.value)
            self.emit(RETURN)
        elif isinstance(s, n.Pass):
            pass
        elif isinstance(s, n.Raise):
            if s.message is not None:
                self.expr(s.message)
            self.emit(RAISE, s.kind, s.message is not None)
        elif isinstance(s, n.If):
            orelse, end = _Label(), _Label()
            self.jump_if(s.test, False, orelse)
            self.stmts(s.body)
            if s.orelse:
                self.emit(JUMP, None, None, end)
            self.mark(orelse)
            self.stmts(s.orelse)
            self.mark(end)
        elif isinstance(s, n.While):
            top, end = _Label(), _Label()
            self.mark(top)
            self.jump_if(s.test, False, end)
            self.stmts(s.body)
            self.emit(JUMP, None, None, top)
            self.mark(end)
        else:
            raise CompileError(f"unsupported statement {type(s).__name__}", getattr(s, "pos", (0, 0)))

    # -- conditions --------------------------------------------------------

    def jump_if(self, e: n.Expr, when: bool, target: _Label) -> None:
        """Jump to ``target`` iff ``e`` evaluates with truthiness ``when``."""
        if isinstance(e, n.UnaryOp) and e.op == "not":
            self.jump_if(e.operand, not when, target)
        elif isinstance(e, n.BoolOp):
            is_and = e.op == "and"
            if is_and == when:
                # and-true / or-false: both operands must agree
                skip = _Label()
                self.jump_if(e.left, not when, skip)
                self.jump_if(e.right, when, target)
                self.mark(skip)
            else:
                self.jump_if(e.left, when, target)
                self.jump_if(e.right, when, target)
        elif isinstance(e, n.Compare):
            self.expr(e.left)
            self.expr(e.right)
            pid = self.new_predicate("binary", e.op, e.pos)
            self.emit(COMPARE_JUMP, (e.op, pid), when, target)
        else:
            self.expr(e)
            pid = self.new_predicate("unary", TRUTHY, getattr(e, "pos", (0, 0)))
            self.emit(TRUTHY_JUMP, pid, when, target)

    # -- expressions -------------------------------------------------------

    def _load_self(self, pos) -> None:
        if not self.has_self:
            raise CompileError("'self' used outside a method", pos)
        self.emit(LOAD_LOCAL, 0)

    def expr(self, e: n.Expr) -> None:
        if isinstance(e, n.Const):
            self.emit(CONST, e.value)
        elif isinstance(e, n.Name):
            if e.id == "self":
                self._load_self(e.pos)
            elif not self.is_module and e.id in self.slots:
                self.emit(LOAD_LOCAL, self.slots[e.id])
            elif e.id in self.mc.globals:
                self.emit(LOAD_GLOBAL, e.id)
            elif e.id in self.mc.functions or e.id in self.mc.classes:
                raise CompileError(f"{e.id!r} can only be called, not used as a value", e.pos)
            else:
                raise CompileError(f"undefined name {e.id!r}", e.pos)
        elif isinstance(e, n.SelfAttr):
            self._load_self(e.pos)
            self.emit(GET_ATTR, e.attr)
        elif isinstance(e, n.BinOp):
            self.expr(e.left)
            self.expr(e.right)
            self.emit(BINARY, e.op)
        elif isinstance(e, n.UnaryOp):
            self.expr(e.operand)
            self.emit(NEG if e.op == "-" else NOT)
        elif isinstance(e, n.Compare):
            self.expr(e.left)
            self.expr(e.right)
            self.emit(COMPARE, e.op)
        elif isinstance(e, n.BoolOp):
            end = _Label()
            self.expr(e.left)
            self.emit(DUP)
            pid = self.new_predicate("unary", TRUTHY, e.left.pos)
            self.emit(TRUTHY_JUMP, pid, e.op == "or", end)
            self.emit(POP)
            self.expr(e.right)
            self.mark(end)
        elif isinstance(e, n.Call):
            for a in e.args:
                self.expr(a)
            argc = len(e.args)
            if e.func in self.mc.functions:
                self.emit(CALL_FUNCTION, self.mc.functions[e.func], argc, e.func)
            elif e.func in self.mc.classes:
                self.emit(NEW, e.func, argc)
            elif e.func in BUILTINS:
                self.emit(CALL_BUILTIN, e.func, argc)
            else:
                raise CompileError(f"undefined function {e.func!r}", e.pos)
        elif isinstance(e, n.MethodCall):
            self.expr(e.receiver)
            for a in e.args:
                self.expr(a)
            self.emit(CALL_METHOD, e.name, len(e.args))
        else:
            raise CompileError(f"unsupported expression {type(e).__name__}", getattr(e, "pos", (0, 0)))


def _assigned_names(body) -> Set[str]:
    out: Set[str] = set()
    for s in body:
        if isinstance(s, n.Assign):
            out.add(s.target)
        elif isinstance(s, n.If):
            out |= _assigned_names(s.body) | _assigned_names(s.orelse)
        elif isinstance(s, n.While):
            out |= _assigned_names(s.body)
    return out


class _ModuleCompiler:
    def __init__(self, ast: n.ModuleAST) -> None:
        self.ast = ast
        self.next_predicate = 0
        self.predicates: List[PredicateSite] = []
        self.globals = _assigned_names(ast.statements)
        # code ids: module body first, then definitions in source order
        self.functions: Dict[str, int] = {}
        self.classes: Dict[str, ClassInfo] = {}
        self._defs: List[Tuple[int, str, str, n.FunctionDef, bool]] = []
        next_id = 1
        for item in ast.top_level:
            if isinstance(item, n.FunctionDef):
                self.functions[item.name] = next_id
                self._defs.append((next_id, "function", item.name, item, False))
                next_id += 1
            elif isinstance(item, n.ClassDef):
                methods: Dict[str, int] = {}
                ctor = None
                for m in item.methods:
                    kind = "constructor" if m.name == "init" else "method"
                    if kind == "constructor":
                        ctor = next_id
                    else:
                        methods[m.name] = next_id
                    self._defs.append((next_id, kind, f"{item.name}.{m.name}", m, True))
                    next_id += 1
                self.classes[item.name] = ClassInfo(item.name, ctor, methods)
        clash = set(self.functions) & set(BUILTINS)
        if clash:
            raise CompileError(f"function name shadows builtin: {sorted(clash)[0]!r}")

    def compile(self) -> CompiledModule:
        codes: List[CodeObject] = []
        mod = _CodeBuilder(self, 0, "module", "<module>", [], set(), False)
        mod.stmts(self.ast.statements)
        codes.append(mod.finish())
        for code_id, kind, name, d, has_self in self._defs:
            params = [p.name for p in d.params]
            b = _CodeBuilder(self, code_id, kind, name, params, _assigned_names(d.body), has_self)
            b.stmts(d.body)
            codes.append(b.finish())
        branches = tuple(
            Branch(p.id, pol) for p in self.predicates for pol in (True, False)
        )
        pool = collect_signatures(self.ast, use_annotations=True)
        return CompiledModule(
            name=self.ast.name,
            code_objects=tuple(codes),
            branches=branches,
            pool=pool,
            constants=collect_constants(self.ast),
            functions=dict(self.functions),
            classes=dict(self.classes),
            predicates=tuple(self.predicates),
            untyped_pool=collect_signatures(self.ast, use_annotations=False),
        )


def compile_module(ast: n.ModuleAST) -> CompiledModule:
    """Compile a parsed module; raises :class:`CompileError` on undefined names."""
    return _ModuleCompiler(ast).compile()


def enumerate_goals(cm: CompiledModule) -> Tuple[Tuple[int, ...], Tuple[Branch, ...]]:
    """Coverage goals in a stable order: code-object ids, then branches."""
    return tuple(c.id for c in cm.code_objects), cm.branches


def _fmt_arg(op: int, a, b, c) -> str:
    if op == CONST:
        return render_literal(a)
    if op in (LOAD_LOCAL, STORE_LOCAL):
        return str(a)
    if op == COMPARE_JUMP:
        return f"{a[0]!s} p{a[1]} if={b} -> {c}"
    if op == TRUTHY_JUMP:
        return f"p{a} if={b} -> {c}"
    if op == JUMP:
        return f"-> {c}"
    if op == CALL_FUNCTION:
        return f"{c}#{a} argc={b}"
    if op in (NEW, CALL_METHOD, CALL_BUILTIN):
        return f"{a} argc={b}"
    if op == RAISE:
        return f"{a} msg={b}"
    return "" if a is None else str(a)


def disassemble(cm: CompiledModule) -> str:
    """Deterministic textual listing of every code object."""
    lines = [f"module {cm.name}: {len(cm.code_objects)} code objects, "
             f"{len(cm.predicates)} predicates, {len(cm.branches)} branches"]
    for co in cm.code_objects:
        lines.append("")
        lines.append(f"code {co.id} {co.name} ({co.kind}) params={co.nparams} "
                     f"locals={','.join(co.local_names) or '-'}")
        for i, (op, a, b, c) in enumerate(co.instructions):
            arg = _fmt_arg(op, a, b, c)
            lines.append(f"  {i:04d} {OPNAMES[op]:<13} {arg}".rstrip())
        for p in co.predicates:
            lines.append(f"  predicate p{p.id} {p.arity} {p.operator} @{p.source_span[0]}:{p.source_span[1]}")
    return "\n".join(lines) + "\n"
