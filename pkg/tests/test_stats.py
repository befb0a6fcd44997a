import pytest
from hypothesis import given, settings, strategies as st
from scipy import stats as sps

from dyntest.stats import EmptySample, compare, mann_whitney_u, vargha_delaney


def test_a12_examples():
    assert vargha_delaney([1, 2, 3], [3, 2, 1]) == 0.5
    assert vargha_delaney([1, 1], [0, 0]) == 1.0
    assert vargha_delaney([3, 1], [2, 2]) == 0.5


def test_empty_samples():
    with pytest.raises(EmptySample):
        vargha_delaney([], [1])
    with pytest.raises(EmptySample):
        mann_whitney_u([1], [])


def test_separated_samples():
    u, p = mann_whitney_u(range(1, 11), range(11, 21))
    assert u == 0 and p < 0.001


def test_identical_samples():
    u, p = mann_whitney_u([0.5] * 10, [0.5] * 10)
    assert abs(p - 1.0) < 0.01
    u, p = mann_whitney_u([1, 2, 3, 4, 5, 6, 7], [1, 2, 3, 4, 5, 6, 7])
    assert abs(p - 1.0) < 0.01


@pytest.mark.parametrize("xs, ys, u, p", [
    ([1], [2], 0.0, 1.0),  # the two possible splits are equally extreme
    ([1, 2], [3, 4], 0.0, 1 / 3),  # U over the 6 splits: 0,1,2,2,3,4
    ([3, 4], [1, 2], 4.0, 1 / 3),
    ([1, 3], [2, 4], 1.0, 2 / 3),  # splits give U = 1,0,2,2,4,3
    ([1, 2, 3], [4, 5, 6], 0.0, 2 / 20),
    ([1, 1], [1, 2], 1.0, 1.0),  # with ties, U=1 against splits 1,1,1,2,... all as extreme
])
def test_hand_enumerated(xs, ys, u, p):
    got_u, got_p = mann_whitney_u(xs, ys)
    assert got_u == u
    assert got_p == pytest.approx(p)


@settings(max_examples=200)
@given(st.lists(st.integers(0, 6), min_size=7, max_size=15), st.lists(st.integers(0, 6), min_size=7, max_size=15))
def test_matches_scipy_asymptotic(xs, ys):
    u, p = mann_whitney_u(xs, ys)
    ref = sps.mannwhitneyu(xs, ys, alternative="two-sided", method="asymptotic", use_continuity=True)
    assert u == ref.statistic
    if len(set(xs + ys)) > 1:
        assert p == pytest.approx(ref.pvalue, rel=1e-9, abs=1e-12)


@settings(max_examples=100)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=6, unique=True),
       st.lists(st.floats(0, 1), min_size=1, max_size=6, unique=True))
def test_matches_scipy_exact_without_ties(xs, ys):
    if set(xs) & set(ys):
        return
    u, p = mann_whitney_u(xs, ys)
    ref = sps.mannwhitneyu(xs, ys, alternative="two-sided", method="exact")
    assert u == ref.statistic
    assert p == pytest.approx(ref.pvalue)


@settings(max_examples=200)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=10), st.lists(st.floats(0, 1), min_size=1, max_size=10))
def test_a12_antisymmetry_and_u(xs, ys):
    a = vargha_delaney(xs, ys)
    assert a + vargha_delaney(ys, xs) == pytest.approx(1.0)
    assert vargha_delaney(xs, xs) == 0.5
    assert 0 <= a <= 1


def test_compare_medians():
    s = compare([0.2, 0.4, 0.9], [0.1, 0.1])
    assert s.medians == (0.4, 0.1) and s.a12 == 1.0
