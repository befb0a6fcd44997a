"""Genetic operators over test cases and test suites, and input selection.

Input selection has two modes. With declared types, a parameter is filled
from earlier variables of the matching type or from a generator of that type
(a primitive literal, or any callable declared to return it, built backwards
recursively). Without them, every earlier variable and every generator is a
candidate for every parameter.
"""
from __future__ import annotations

import random
import string
from dataclasses import dataclass, fields
from typing import List, Optional, Sequence, Tuple

from dyntest.lang.analysis import (
    BOOL,
    FLOAT,
    INT,
    NONE,
    STR,
    CallablePool,
    CallableSig,
    ConstantPool,
    TypeRef,
    class_type,
    type_of_value,
)
from dyntest.testcase import (
    Constructor,
    Function,
    Method,
    Primitive,
    Statement,
    TestCase,
    TestSuite,
    delete_statement,
    insert_statement,
    inferred_type,
)

PRIMITIVE_GENERATORS = (INT, FLOAT, BOOL, STR)
STRING_ALPHABET = string.ascii_letters + string.digits + string.punctuation + " "


@dataclass(frozen=True)
class SearchConfig:
    max_test_length: int = 40  # L
    max_suite_size: int = 50  # N
    sigma: float = 0.1
    population: int = 50
    crossover_rate: float = 0.75
    tournament_size: int = 5
    elitism: int = 1
    initial_suite_size_max: int = 10
    seed: int = 0
    use_annotations: bool = True
    constant_seeding_prob: float = 0.3
    max_generation_depth: int = 10
    max_insert_attempts: int = 100
    int_range: int = 1000
    float_range: float = 1000.0
    string_max_length: int = 10
    int_delta_max: int = 20
    k: float = 1.0
    step_budget: int = 100_000

    def __post_init__(self) -> None:
        if self.max_test_length < 1:
            raise ValueError("max_test_length (L) must be >= 1")
        if self.max_suite_size < 1:
            raise ValueError("max_suite_size (N) must be >= 1")
        if not 0 < self.sigma < 1:
            raise ValueError("sigma must lie in (0, 1)")
        if self.population < 1 or self.tournament_size < 1:
            raise ValueError("population and tournament_size must be >= 1")
        if not 0 <= self.elitism <= self.population:
            raise ValueError("elitism must lie in [0, population]")
        if not 0 <= self.crossover_rate <= 1 or not 0 <= self.constant_seeding_prob <= 1:
            raise ValueError("probabilities must lie in [0, 1]")

    @classmethod
    def field_names(cls) -> Tuple[str, ...]:
        return tuple(f.name for f in fields(cls))


def make_rng(seed: int) -> random.Random:
    return random.Random(seed)


class GenerationFailure(Exception):
    """Input selection could not produce a value (e.g. recursion too deep)."""


# -- value generation ----------------------------------------------------------


def random_primitive(t: TypeRef, constants: ConstantPool, cfg: SearchConfig, rng: random.Random):
    if t.kind == "none":
        return None
    if t.kind == "bool":
        return rng.random() < 0.5
    seeded = constants.values_for(t)
    if seeded and rng.random() < cfg.constant_seeding_prob:
        return rng.choice(seeded)
    if t.kind == "int":
        return rng.randint(-cfg.int_range, cfg.int_range)
    if t.kind == "float":
        return rng.uniform(-cfg.float_range, cfg.float_range)
    if t.kind == "str":
        size = rng.randint(0, cfg.string_max_length)
        return "".join(rng.choice(STRING_ALPHABET) for _ in range(size))
    raise ValueError(f"not a primitive type: {t}")


def _int_delta(rng: random.Random, max_delta: int) -> int:
    # magnitude decays geometrically, truncated at max_delta
    m = 1
    while m < max_delta and rng.random() < 0.8:
        m += 1
    return m if rng.random() < 0.5 else -m


def perturb_primitive(value, constants: ConstantPool, cfg: SearchConfig, rng: random.Random):
    """Random change to a primitive value that keeps its type."""
    t = type(value)
    if t is bool:
        return not value
    if t is int:
        return value + _int_delta(rng, cfg.int_delta_max)
    if t is float:
        return value + rng.gauss(0.0, 1.0)
    if t is str:
        chars = list(value)
        ops = ["insert"] + (["replace", "delete"] if chars else [])
        op = rng.choice(ops)
        if op == "insert":
            chars.insert(rng.randint(0, len(chars)), rng.choice(STRING_ALPHABET))
        elif op == "replace":
            chars[rng.randrange(len(chars))] = rng.choice(STRING_ALPHABET)
        else:
            del chars[rng.randrange(len(chars))]
        return "".join(chars)
    return value


# -- backwards construction -----------------------------------------------------


def _statement_type(stmt: Statement, types: Sequence[TypeRef], pool: CallablePool) -> TypeRef:
    if isinstance(stmt, Primitive):
        return type_of_value(stmt.value)
    if isinstance(stmt, Constructor):
        return class_type(stmt.cls)
    if isinstance(stmt, Function):
        sig = pool.function(stmt.name)
    else:
        recv = types[stmt.receiver]
        sig = pool.method(recv.name, stmt.name) if recv.kind == "class" else None
    return sig.returns if sig is not None else TypeRef("unknown")


class _Builder:
    """Mutable working copy of a test case used while generating statements."""

    def __init__(self, t: TestCase, pool: CallablePool, constants: ConstantPool,
                 cfg: SearchConfig, rng: random.Random) -> None:
        self.pool = pool
        self.constants = constants
        self.cfg = cfg
        self.rng = rng
        self.stmts: List[Statement] = list(t.statements)
        self.types: List[TypeRef] = []
        for s in self.stmts:
            self.types.append(_statement_type(s, self.types, pool))

    def freeze(self) -> TestCase:
        return TestCase(tuple(self.stmts))

    def insert(self, pos: int, stmt: Statement) -> None:
        insert_statement(self.stmts, pos, stmt)
        self.types.insert(pos, _statement_type(stmt, self.types[:pos], self.pool))

    def generators_for(self, t: TypeRef) -> list:
        if t.kind == "unknown":
            return [("prim", g) for g in PRIMITIVE_GENERATORS] + [("call", e) for e in self.pool]
        if t.is_primitive:
            return [("prim", t)]
        return [
            ("call", e) for e in self.pool
            if e.returns == t and (e.kind != "method" or e.owner is not None)
        ]

    def satisfy(self, declared: TypeRef, pos: int, depth: int) -> Tuple[int, int]:
        """Pick or build a value for ``declared`` usable at ``pos``.

        Returns ``(var_ref, new_pos)``; generated statements are inserted at
        ``pos`` so the caller's statement moves to ``new_pos``.
        """
        if depth > self.cfg.max_generation_depth:
            raise GenerationFailure("generator recursion too deep")
        t = declared
        if t.kind == "any":
            t = self.rng.choice(self.pool.type_set())
        if t.kind == "unknown":
            existing = list(range(pos))
        else:
            existing = [i for i in range(pos) if self.types[i] == t]
        candidates = [("var", i) for i in existing] + self.generators_for(t)
        if not candidates:
            raise GenerationFailure(f"no generator for {t}")
        kind, what = self.rng.choice(candidates)
        if kind == "var":
            return what, pos
        if kind == "prim":
            self.insert(pos, Primitive(random_primitive(what, self.constants, self.cfg, self.rng)))
            return pos, pos + 1
        return self.call(what, pos, depth + 1)

    def call(self, sig: CallableSig, pos: int, depth: int) -> Tuple[int, int]:
        """Insert a call to ``sig`` at ``pos`` with all inputs satisfied."""
        recv = None
        if sig.kind == "method":
            # receivers always come from the owning class
            recv, pos = self.satisfy(class_type(sig.owner), pos, depth)
        args = []
        for _, ptype in sig.params:
            ref, pos = self.satisfy(ptype, pos, depth)
            args.append(ref)
        if sig.kind == "constructor":
            stmt: Statement = Constructor(sig.owner, tuple(args))
        elif sig.kind == "method":
            stmt = Method(recv, sig.name, tuple(args))
        else:
            stmt = Function(sig.name, tuple(args))
        self.insert(pos, stmt)
        return pos, pos + 1

    def signature_of(self, index: int) -> Optional[CallableSig]:
        s = self.stmts[index]
        if isinstance(s, Constructor):
            return self.pool.constructor(s.cls)
        if isinstance(s, Function):
            return self.pool.function(s.name)
        if isinstance(s, Method):
            recv = self.types[s.receiver]
            if recv.kind == "class":
                return self.pool.method(recv.name, s.name)
            # untyped receiver: fall back to any class defining the method
            for e in self.pool:
                if e.kind == "method" and e.name == s.name:
                    return e
        return None


def select_input(declared: TypeRef, t: TestCase, position: int, pool: CallablePool,
                 constants: ConstantPool, cfg: SearchConfig, rng: random.Random) -> Tuple[TestCase, int]:
    """Choose a value for a parameter of a statement placed at ``position``.

    Returns the (possibly extended) test case and the chosen variable. Any
    generated prefix statements are inserted at ``position``.
    """
    if not 0 <= position <= len(t):
        raise ValueError("position out of range")
    b = _Builder(t, pool, constants, cfg, rng)
    ref, _ = b.satisfy(declared, position, 0)
    return b.freeze(), ref


# -- test case operators ----------------------------------------------------------


def _insert_random(b: _Builder, append: bool) -> bool:
    """Insert one random call or primitive into ``b``; roll back on failure."""
    cfg, rng = b.cfg, b.rng
    if len(b.stmts) >= cfg.max_test_length:
        return False
    saved = (list(b.stmts), list(b.types))
    pos = len(b.stmts) if append else rng.randint(0, len(b.stmts))
    choice = rng.choice(tuple(b.pool.entries) + (None,))
    try:
        if choice is None:
            ptype = rng.choice(PRIMITIVE_GENERATORS)
            b.insert(pos, Primitive(random_primitive(ptype, b.constants, cfg, rng)))
        else:
            b.call(choice, pos, 0)
    except GenerationFailure:
        b.stmts, b.types = saved
        return False
    if len(b.stmts) > cfg.max_test_length:
        b.stmts, b.types = saved
        return False
    return True


def insert_random_statement(t: TestCase, pool: CallablePool, constants: ConstantPool,
                            cfg: SearchConfig, rng: random.Random, append: bool = False) -> TestCase:
    """Insert a random call (or a primitive) at a random position, or at the end.

    Returns ``t`` itself when nothing could be inserted.
    """
    if len(t) >= cfg.max_test_length:
        return t
    b = _Builder(t, pool, constants, cfg, rng)
    return b.freeze() if _insert_random(b, append) else t


def sample_random_testcase(pool: CallablePool, constants: ConstantPool, cfg: SearchConfig,
                           rng: random.Random) -> TestCase:
    """Draw r uniformly from [1, L] and insert until the case has r statements."""
    r = rng.randint(1, cfg.max_test_length)
    b = _Builder(TestCase(()), pool, constants, cfg, rng)
    for _ in range(cfg.max_insert_attempts):
        if len(b.stmts) >= r:
            break
        _insert_random(b, append=False)
    return b.freeze()


def _remove_statement(stmts: List[Statement], rng: random.Random) -> List[Statement]:
    if not stmts:
        return stmts
    return delete_statement(stmts, rng.randrange(len(stmts)))


def _change_statement(t: TestCase, pool: CallablePool, constants: ConstantPool,
                      cfg: SearchConfig, rng: random.Random) -> TestCase:
    if not len(t):
        return t
    b = _Builder(t, pool, constants, cfg, rng)
    pos = rng.randrange(len(b.stmts))
    s = b.stmts[pos]
    if isinstance(s, Primitive):
        b.stmts[pos] = Primitive(perturb_primitive(s.value, constants, cfg, rng))
        return b.freeze()
    sig = b.signature_of(pos)
    if sig is None:
        return t
    try:
        if isinstance(s, Constructor):
            alternatives: list = []
        elif isinstance(s, Method):
            alternatives = [e for e in pool.methods_of(sig.owner)
                            if e.name != s.name and e.returns == sig.returns]
        else:
            alternatives = [e for e in pool
                            if e.kind == "function" and e.name != s.name and e.returns == sig.returns]
        if alternatives and rng.random() < 0.5:
            new_sig = rng.choice(alternatives)
            args = []
            for _, ptype in new_sig.params:
                ref, pos = b.satisfy(ptype, pos, 0)
                args.append(ref)
            cur = b.stmts[pos]
            if isinstance(cur, Method):
                b.stmts[pos] = Method(cur.receiver, new_sig.name, tuple(args))
            else:
                b.stmts[pos] = Function(new_sig.name, tuple(args))
            b.types[pos] = new_sig.returns
        elif sig.params:
            i = rng.randrange(len(sig.params))
            ref, pos = b.satisfy(sig.params[i][1], pos, 0)
            cur = b.stmts[pos]
            args = list(cur.args)
            args[i] = ref
            if isinstance(cur, Constructor):
                b.stmts[pos] = Constructor(cur.cls, tuple(args))
            elif isinstance(cur, Method):
                b.stmts[pos] = Method(cur.receiver, cur.name, tuple(args))
            else:
                b.stmts[pos] = Function(cur.name, tuple(args))
        else:
            return t
    except GenerationFailure:
        return t
    if len(b.stmts) > cfg.max_test_length:
        return t
    return b.freeze()


def mutate_testcase(t: TestCase, pool: CallablePool, constants: ConstantPool,
                    cfg: SearchConfig, rng: random.Random) -> TestCase:
    """Apply remove, change and insert, each independently with probability 1/3."""
    if rng.random() < 1 / 3:
        t = TestCase(tuple(_remove_statement(list(t.statements), rng)))
    if rng.random() < 1 / 3:
        t = _change_statement(t, pool, constants, cfg, rng)
    if rng.random() < 1 / 3:
        t = insert_random_statement(t, pool, constants, cfg, rng)
    return t


# -- suite operators ----------------------------------------------------------------


def crossover(p1: TestSuite, p2: TestSuite, rng: random.Random) -> Tuple[TestSuite, TestSuite]:
    """Single-point relative crossover: split both parents at the same fraction."""
    alpha = rng.random()
    s1 = -(-int(alpha * len(p1) * 1e9) // int(1e9)) if len(p1) else 0
    s2 = -(-int(alpha * len(p2) * 1e9) // int(1e9)) if len(p2) else 0
    o1 = p1.tests[:s1] + p2.tests[s2:]
    o2 = p2.tests[:s2] + p1.tests[s1:]
    return TestSuite(o1), TestSuite(o2)


def mutate_suite(suite: TestSuite, pool: CallablePool, constants: ConstantPool,
                 cfg: SearchConfig, rng: random.Random) -> TestSuite:
    """Mutate each test with probability 1/|T|, drop emptied tests, then append
    new random tests with probabilities sigma, sigma^2, ... while below N."""
    tests: List[TestCase] = []
    if len(suite):
        p = 1.0 / len(suite)
        for t in suite.tests:
            if rng.random() < p:
                t = mutate_testcase(t, pool, constants, cfg, rng)
            if len(t):
                tests.append(t)
    i = 1
    while len(tests) < cfg.max_suite_size and rng.random() < cfg.sigma ** i:
        tests.append(sample_random_testcase(pool, constants, cfg, rng))
        i += 1
    if not tests:
        tests.append(sample_random_testcase(pool, constants, cfg, rng))
    return TestSuite(tuple(t for t in tests if len(t)) or tuple(tests))


__all__ = [
    "GenerationFailure", "SearchConfig", "crossover", "insert_random_statement",
    "make_rng", "mutate_suite", "mutate_testcase", "perturb_primitive",
    "random_primitive", "sample_random_testcase", "select_input", "inferred_type",
]
