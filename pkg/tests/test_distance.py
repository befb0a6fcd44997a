import math

import pytest
from hypothesis import given, settings, strategies as st

from dyntest.distance import (
    INF, DistanceConfig, branch_distance, levenshtein, truthiness_distance, truthy,
)

from oracles import distance, lev_recursive

OPS = ["==", "!=", "<", "<=", ">", ">=", "in", "not in", "is", "is not"]


@pytest.mark.parametrize("op, a, b, pol, expected", [
    ("==", 7, 7, True, 0),
    ("==", 5, 9, True, 4),
    ("==", "abc", "abd", True, 1),
    ("<", 5, 3, True, 3),
    ("==", 5, "a", True, INF),
    ("in", "b", "abc", False, 1),
    ("<", 5, 3, False, 0),
    ("<", "a", "b", True, 0),
    ("<", "b", "a", True, INF),
    ("!=", 1, 1, True, 1),
    ("is", None, None, True, 0),
])
def test_examples(op, a, b, pol, expected):
    assert branch_distance(op, a, b, pol) == expected


def test_k_is_used():
    cfg = DistanceConfig(k=2.5)
    assert branch_distance("<", 5, 3, True, cfg) == 4.5
    assert branch_distance("!=", 1, 1, True, cfg) == 2.5
    assert truthiness_distance(0, True, cfg) == 2.5
    with pytest.raises(ValueError):
        DistanceConfig(k=0)


def test_truthiness():
    assert truthiness_distance(0, True) == 1
    assert truthiness_distance("x", True) == 0
    assert truthiness_distance(None, False) == 0
    assert [truthy(v) for v in (0, 0.0, "", None, False, 1, "a", True)] == [False] * 5 + [True] * 3


@pytest.mark.parametrize("x, y, d", [("", "abc", 3), ("kitten", "sitting", 3), ("a", "a", 0)])
def test_levenshtein_examples(x, y, d):
    assert levenshtein(x, y) == d


@settings(max_examples=300)
@given(st.text("abc", max_size=8), st.text("abc", max_size=8))
def test_levenshtein_matches_recursive(x, y):
    assert levenshtein(x, y) == lev_recursive(x, y)


_values = st.one_of(
    st.integers(-50, 50),
    st.floats(-50, 50, allow_nan=False),
    st.booleans(),
    st.text("ab", max_size=4),
    st.none(),
)


@settings(max_examples=500)
@given(st.sampled_from(OPS), _values, _values, st.booleans())
def test_matches_oracle(op, a, b, pol):
    assert branch_distance(op, a, b, pol) == distance(op, a, b, pol)


@settings(max_examples=300)
@given(st.floats(-1e6, 1e6, allow_nan=False), st.floats(-1e6, 1e6, allow_nan=False))
def test_symmetry(a, b):
    assert branch_distance(">", a, b) == branch_distance("<", b, a)
    assert branch_distance(">=", a, b) == branch_distance("<=", b, a)


def _comparable(op, a, b):
    if op in ("<", "<=", ">", ">="):
        num = lambda v: type(v) in (int, float, bool)  # noqa: E731
        return (num(a) and num(b)) or (type(a) is str and type(b) is str)
    if op in ("in", "not in"):
        return type(a) is str and type(b) is str
    return True


@settings(max_examples=500)
@given(st.sampled_from(OPS), _values, _values)
def test_exclusivity(op, a, b):
    dt, df = branch_distance(op, a, b, True), branch_distance(op, a, b, False)
    zeros = (dt == 0) + (df == 0)
    if _comparable(op, a, b):
        assert zeros == 1 and max(dt, df) > 0
    else:
        assert zeros == 0


def test_overflow_is_infinite():
    assert branch_distance("<", 10 ** 400, 1.0) == INF
    assert math.isinf(branch_distance("==", 10 ** 400, 1.0))
