import itertools

import pytest
from hypothesis import given, settings, strategies as st

from dyntest.compiler import Branch
from dyntest.distance import INF
from dyntest.fitness import (
    DegenerateModule, MixedModuleError, SuiteExecutionSummary, branch_fitness, coverage,
    merge, normalize, suite_fitness,
)
from dyntest.search import SearchConfig, make_rng, sample_random_testcase
from dyntest.testcase import TestCase
from dyntest.vm import ExecutionResult, execute_test

from conftest import compile_source, corpus_paths


def _result(codes, dists, counts=None):
    counts = counts if counts is not None else {p: 1 for p in dists}
    return ExecutionResult(frozenset(codes), dict(dists), dict(counts))


def _summary(codes, dists, counts):
    return SuiteExecutionSummary(frozenset(codes), dict(dists), dict(counts))


# a module with 3 code objects and 2 predicates (4 branches)
SMALL = compile_source("def f(x) { if x < 3 { return 1 } }\ndef g(y) { if y { return 2 } }")


def test_merge_min_union_sum():
    s = merge([_result({0, 1}, {0: (3.0, 0.0)}), _result({0, 2}, {0: (1.0, 0.0)}, {0: 2})])
    assert s.d_min(Branch(0, True)) == 1.0
    assert s.executed_code_objects == {0, 1, 2}
    assert s.execution_count_per_predicate == {0: 3}
    empty = merge([])
    assert empty.executed_code_objects == frozenset() and empty.min_distance_per_branch == {}


def test_merge_rejects_foreign_predicates():
    with pytest.raises(MixedModuleError):
        merge([_result({0}, {7: (0.0, 1.0)})], num_predicates=2)


def test_normalize():
    assert normalize(0) == 0
    assert normalize(1) == 0.5
    assert normalize(4) == 0.8
    assert normalize(INF) == 1
    with pytest.raises(ValueError):
        normalize(-1)


def test_branch_fitness_cases():
    b = Branch(0, True)
    assert branch_fitness(b, _summary({0}, {0: (0.0, 2.0)}, {0: 1})) == 0
    assert branch_fitness(b, _summary({0}, {0: (4.0, 0.0)}, {0: 1})) == 1
    assert branch_fitness(b, _summary({0}, {0: (4.0, 0.0)}, {0: 3})) == pytest.approx(0.8)
    assert branch_fitness(b, _summary({0}, {}, {})) == 1


def test_suite_fitness_example():
    # |C| = 3, only the module body ran, no predicate executed
    s = _summary({0}, {}, {})
    assert suite_fitness(s, SMALL) == 2 + 4


def test_full_coverage_fitness_zero():
    s = _summary({0, 1, 2}, {0: (0.0, 0.0), 1: (0.0, 0.0)}, {0: 2, 1: 2})
    assert suite_fitness(s, SMALL) == 0 and coverage(s, SMALL) == 1


def test_no_branch_module():
    cm = compile_source("def f() { return 1 }")
    assert suite_fitness(_summary({0, 1}, {}, {}), cm) == 0


def test_coverage_four_sevenths():
    s = _summary({0, 1}, {0: (0.0, 3.0), 1: (1.0, 0.0)}, {0: 1, 1: 1})
    assert coverage(s, SMALL) == pytest.approx(4 / 7)


class _Shape:
    """Stand-in module with given goal counts."""

    def __init__(self, codes, branches):
        self.code_objects = tuple(range(codes))
        self.branches = tuple(range(branches))


def test_import_only_coverage():
    assert coverage(_summary({0}, {}, {}), _Shape(5, 5)) == pytest.approx(0.1)
    cm = compile_source("""
def a(x) { if x { return 1 } }
def b(x) { if x > 1 { return 1 } }
def c(x) { return x }
def d(x) { if x and x { return 2 } }
""")
    assert len(cm.code_objects) == 5 and len(cm.branches) == 8
    s = merge([execute_test(cm, TestCase(()))])
    assert coverage(s, cm) == pytest.approx(1 / 13)


def test_degenerate_module():
    with pytest.raises(DegenerateModule):
        coverage(_summary(set(), {}, {}), _Shape(0, 0))


_states = st.sampled_from(["none", "true", "false", "both"])


@settings(max_examples=300)
@given(st.lists(st.booleans(), min_size=3, max_size=3), st.lists(_states, min_size=2, max_size=2),
       st.lists(st.integers(1, 3), min_size=2, max_size=2), st.floats(0.01, 100))
def test_zero_fitness_iff_full_coverage(codes, states, counts, d):
    dists, cnt = {}, {}
    for pid, (state, c) in enumerate(zip(states, counts)):
        if state == "none":
            continue
        dists[pid] = {"true": (0.0, d), "false": (d, 0.0), "both": (0.0, 0.0)}[state]
        cnt[pid] = c
    s = _summary({i for i, on in enumerate(codes) if on}, dists, cnt)
    f, cov = suite_fitness(s, SMALL), coverage(s, SMALL)
    assert (f == 0) == (cov == 1)
    assert 0 <= f <= len(SMALL.code_objects) + len(SMALL.branches)
    for b in SMALL.branches:
        assert 0 <= branch_fitness(b, s) <= 1


def test_zero_fitness_iff_full_coverage_exhaustive():
    # every combination of executed code objects and per-branch outcomes
    outcomes = [None, (0.0, 2.0), (2.0, 0.0), (0.0, 0.0)]
    for codes in itertools.product([False, True], repeat=3):
        for o0, o1 in itertools.product(outcomes, repeat=2):
            for c0, c1 in itertools.product([1, 2], repeat=2):
                dists = {p: o for p, o in ((0, o0), (1, o1)) if o is not None}
                counts = {p: c for p, c in ((0, c0), (1, c1)) if p in dists}
                s = _summary({i for i in range(3) if codes[i]}, dists, counts)
                assert (suite_fitness(s, SMALL) == 0) == (coverage(s, SMALL) == 1)


CORPUS = [compile_source(p.read_text(), p.stem) for p in corpus_paths()]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10 ** 6), st.integers(0, len(CORPUS) - 1))
def test_adding_a_test_is_monotone(seed, which):
    cm = CORPUS[which]
    rng = make_rng(seed)
    cfg = SearchConfig(max_test_length=10)
    results = [execute_test(cm, sample_random_testcase(cm.pool, cm.constants, cfg, rng)) for _ in range(4)]
    for i in range(1, len(results)):
        before, after = merge(results[:i]), merge(results[: i + 1])
        assert suite_fitness(after, cm) <= suite_fitness(before, cm)
        assert coverage(after, cm) >= coverage(before, cm)


@pytest.mark.parametrize("scale", [0.1, 1.0, 7.0, 1000.0])
def test_ranking_stable_under_distance_scaling(scale):
    # A dominates B branch by branch and covers strictly more
    a = {0: (0.0, 2.0), 1: (3.0, 0.0)}
    b = {0: (1.0, 2.0), 1: (5.0, 0.0)}
    counts = {0: 2, 1: 2}

    def scaled(d):
        return {p: tuple(x * scale for x in v) for p, v in d.items()}

    fa = suite_fitness(_summary({0, 1, 2}, scaled(a), counts), SMALL)
    fb = suite_fitness(_summary({0, 1, 2}, scaled(b), counts), SMALL)
    assert fa < fb
