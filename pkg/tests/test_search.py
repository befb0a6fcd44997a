import math

import pytest
from hypothesis import given, settings, strategies as st

from dyntest import search
from dyntest.lang import ANY, INT, UNKNOWN, CallablePool, ConstantPool, class_type
from dyntest.lang.analysis import CallableSig
from dyntest.search import (
    GenerationFailure, SearchConfig, crossover, insert_random_statement, make_rng, mutate_suite,
    mutate_testcase, perturb_primitive, sample_random_testcase, select_input,
)
from dyntest.testcase import (
    Constructor, Function, Method, Primitive, TestCase, TestSuite, inferred_type, testcase, validate,
)

from conftest import compile_source, corpus_paths

CORPUS = [compile_source(p.read_text(), p.stem) for p in corpus_paths()]


def _suite(n, tag=0):
    return TestSuite(tuple(testcase(Primitive(tag * 1000 + i)) for i in range(n)))


def test_config_validation():
    for bad in (dict(max_test_length=0), dict(max_suite_size=0), dict(sigma=0.0), dict(sigma=1.0)):
        with pytest.raises(ValueError):
            SearchConfig(**bad)


def test_select_input_prepends_constructor(foo_bar):
    cfg = SearchConfig()
    seen_plain = False
    for seed in range(30):
        t, ref = select_input(class_type("Bar"), TestCase(()), 0, foo_bar.pool, foo_bar.constants, cfg, make_rng(seed))
        assert t[0] == Constructor("Bar")
        assert inferred_type(t, ref, foo_bar.pool) == class_type("Bar")
        seen_plain |= t == testcase(Constructor("Bar")) and ref == 0
    assert seen_plain


def test_select_input_forced_seed(foo_bar):
    cfg = SearchConfig(constant_seeding_prob=1.0)
    t, ref = select_input(INT, TestCase(()), 0, foo_bar.pool, ConstantPool(ints=frozenset({42})), cfg, make_rng(1))
    assert t == testcase(Primitive(42)) and ref == 0


def test_untyped_may_pick_wrong_type(foo_bar):
    start = testcase(Primitive("abc"))
    picks = set()
    for seed in range(100):
        t, ref = select_input(UNKNOWN, start, 1, foo_bar.untyped_pool, foo_bar.constants, SearchConfig(), make_rng(seed))
        if t == start:
            picks.add(ref)
    assert 0 in picks


def test_any_draws_a_concrete_type():
    cm = next(c for c in CORPUS if c.name == "truthiness")
    kinds = set()
    for seed in range(200):
        t, ref = select_input(ANY, TestCase(()), 0, cm.pool, cm.constants, SearchConfig(), make_rng(seed))
        kinds.add(inferred_type(t, ref, cm.pool).kind)
    assert {"int", "float", "bool", "str"} <= kinds


def test_recursion_limit():
    # the only way to obtain a Node is from another Node
    sig = CallableSig("function", None, "grow", (("n", class_type("Node")),), class_type("Node"))
    pool = CallablePool((sig,))
    with pytest.raises(GenerationFailure):
        select_input(class_type("Node"), TestCase(()), 0, pool, ConstantPool(), SearchConfig(), make_rng(0))
    t = testcase(Primitive(1))
    for seed in range(20):
        out = insert_random_statement(t, pool, ConstantPool(), SearchConfig(), make_rng(seed))
        # either the failed insertion left t alone, or a primitive was added
        assert out is t or (len(out) == 2 and all(isinstance(s, Primitive) for s in out))


def test_insert_into_empty_foo_bar_starts_with_bar(foo_bar):
    for seed in range(50):
        t = insert_random_statement(TestCase(()), foo_bar.pool, foo_bar.constants, SearchConfig(), make_rng(seed))
        assert len(t) >= 1
        if not isinstance(t[0], Primitive):
            assert t[0] == Constructor("Bar")


def test_sample_length_one():
    cm = CORPUS[0]
    cfg = SearchConfig(max_test_length=1)
    for seed in range(20):
        assert len(sample_random_testcase(cm.pool, cm.constants, cfg, make_rng(seed))) == 1


def test_sample_only_zero_arg_constructor():
    pool = CallablePool((CallableSig("constructor", "Unit", "Unit", (), class_type("Unit")),))
    cfg = SearchConfig(max_test_length=3)
    rng = make_rng(3)
    t = TestCase(())
    while len(t) < 3:
        t = insert_random_statement(t, pool, ConstantPool(), cfg, rng)
    assert len(t) == 3


def test_sample_length_is_uniform():
    # with a pool whose every insertion adds exactly one statement the length is r itself
    pool = CallablePool((CallableSig("constructor", "Unit", "Unit", (), class_type("Unit")),))
    cfg = SearchConfig(max_test_length=100)
    rng = make_rng(11)
    lengths = [len(sample_random_testcase(pool, ConstantPool(), cfg, rng)) for _ in range(3000)]
    assert abs(sum(lengths) / len(lengths) - 50.5) / 50.5 < 0.04
    assert min(lengths) == 1 and max(lengths) == 100


@pytest.mark.parametrize("n1, n2", [(4, 2), (1, 1), (1, 50), (50, 50), (7, 3)])
def test_crossover_sizes(n1, n2):
    rng = make_rng(n1 * 100 + n2)
    p1, p2 = _suite(n1, 1), _suite(n2, 2)
    for _ in range(200):
        o1, o2 = crossover(p1, p2, rng)
        assert abs(len(o1) - len(o2)) <= abs(n1 - n2)
        assert max(len(o1), len(o2)) <= max(n1, n2)
        assert len(o1) >= 1 and len(o2) >= 1
        assert sorted(map(id, o1.tests + o2.tests)) == sorted(map(id, p1.tests + p2.tests))


def test_crossover_half_split():
    class Half:
        def random(self):
            return 0.5

    o1, o2 = crossover(_suite(4, 1), _suite(2, 2), Half())
    assert (len(o1), len(o2)) == (3, 3)


def test_crossover_identical_parents():
    p = _suite(5)
    o1, o2 = crossover(p, p, make_rng(0))
    assert len(o1) == len(o2) == 5


def test_change_int_moves(foo_bar):
    rng = make_rng(5)
    cfg = SearchConfig()
    moved = sum(perturb_primitive(5, foo_bar.constants, cfg, rng) != 5 for _ in range(2000))
    assert moved / 2000 >= 0.9
    deltas = {perturb_primitive(0, foo_bar.constants, cfg, rng) for _ in range(3000)}
    assert 0 not in deltas and max(deltas) <= 20 and min(deltas) >= -20


def test_change_keeps_type(foo_bar):
    rng = make_rng(9)
    cfg = SearchConfig()
    for v in (3, 2.5, True, "abc", ""):
        for _ in range(50):
            assert type(perturb_primitive(v, foo_bar.constants, cfg, rng)) is type(v)


def test_remove_only_statement_gives_empty(foo_bar):
    t = testcase(Constructor("Bar"))
    assert search._remove_statement(list(t.statements), make_rng(0)) == []


def test_full_suite_gets_no_new_tests(foo_bar, monkeypatch):
    cfg = SearchConfig(max_suite_size=4, sigma=0.99)
    monkeypatch.setattr(search, "mutate_testcase", lambda t, *a: t)
    s = _suite(4)
    for seed in range(50):
        assert len(mutate_suite(s, foo_bar.pool, foo_bar.constants, cfg, make_rng(seed))) == 4


def test_emptied_test_is_removed(foo_bar, monkeypatch):
    monkeypatch.setattr(search, "mutate_testcase", lambda t, *a: TestCase(()))
    s = TestSuite((testcase(Primitive(1)), testcase(Primitive(2))))
    out = mutate_suite(s, foo_bar.pool, foo_bar.constants, SearchConfig(sigma=0.01), make_rng(1))
    assert all(len(t) > 0 for t in out.tests)


def _random_suite(cm, cfg, rng, typed=True):
    pool = cm.callable_pool(typed)
    n = rng.randint(1, 6)
    return TestSuite(tuple(sample_random_testcase(pool, cm.constants, cfg, rng) for _ in range(n)))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, len(CORPUS) - 1), st.booleans())
def test_closure_and_bounds(seed, which, typed):
    cm = CORPUS[which]
    cfg = SearchConfig(max_test_length=15, max_suite_size=8, sigma=0.5)
    rng = make_rng(seed)
    pool = cm.callable_pool(typed)
    a, b = _random_suite(cm, cfg, rng, typed), _random_suite(cm, cfg, rng, typed)
    for _ in range(10):
        a, b = crossover(a, b, rng)
        a = mutate_suite(a, pool, cm.constants, cfg, rng)
        b = mutate_suite(b, pool, cm.constants, cfg, rng)
        for s in (a, b):
            assert 1 <= len(s) <= cfg.max_suite_size
            for t in s.tests:
                assert 1 <= len(t) <= cfg.max_test_length
                assert validate(t, cfg.max_test_length, pool) == []


def test_determinism():
    cm = CORPUS[0]
    cfg = SearchConfig(max_test_length=15)

    def run(seed):
        rng = make_rng(seed)
        s = _random_suite(cm, cfg, rng)
        for _ in range(20):
            s = mutate_suite(s, cm.pool, cm.constants, cfg, rng)
        return s

    assert run(4) == run(4)
    assert run(4) != run(5)


def _check_typed(cm, t):
    pool = cm.pool
    for i, s in enumerate(t.statements):
        if isinstance(s, Primitive):
            continue
        if isinstance(s, Constructor):
            sig = pool.constructor(s.cls)
        elif isinstance(s, Function):
            sig = pool.function(s.name)
        else:
            recv = inferred_type(t, s.receiver, pool)
            assert recv.kind == "class"
            sig = pool.method(recv.name, s.name)
        assert sig is not None
        for (name, declared), ref in zip(sig.params, s.args):
            if declared != ANY:
                assert inferred_type(t, ref, pool) == declared, (cm.name, sig.qualname, name)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(0, len(CORPUS) - 1))
def test_typed_mode_soundness(seed, which):
    cm = CORPUS[which]
    cfg = SearchConfig(max_test_length=20)
    rng = make_rng(seed)
    t = sample_random_testcase(cm.pool, cm.constants, cfg, rng)
    for _ in range(20):
        _check_typed(cm, t)
        mutated = mutate_testcase(t, cm.pool, cm.constants, cfg, rng)
        if len(mutated):
            t = mutated
    _check_typed(cm, t)


def test_mutation_operator_frequencies(foo_bar, monkeypatch):
    counts = {"remove": 0, "change": 0, "insert": 0}

    def counting(name, fn):
        def wrapped(*a, **k):
            counts[name] += 1
            return fn(*a, **k)
        return wrapped

    monkeypatch.setattr(search, "_remove_statement", counting("remove", search._remove_statement))
    monkeypatch.setattr(search, "_change_statement", counting("change", search._change_statement))
    monkeypatch.setattr(search, "insert_random_statement", counting("insert", search.insert_random_statement))
    rng = make_rng(2)
    cfg = SearchConfig(max_test_length=10)
    t = testcase(Constructor("Bar"), Constructor("Foo", (0,)))
    trials = 6000
    for _ in range(trials):
        mutate_testcase(t, foo_bar.pool, foo_bar.constants, cfg, rng)
    for c in counts.values():
        assert abs(c / trials - 1 / 3) < 0.03
