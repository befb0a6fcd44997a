"""Effect size and rank test for comparing coverage samples."""
from __future__ import annotations

import itertools
import math
import statistics
from dataclasses import dataclass
from typing import List, Sequence, Tuple

# combined sample size up to which the U distribution is enumerated exactly
EXACT_LIMIT = 12


class EmptySample(ValueError):
    pass


@dataclass(frozen=True)
class ComparisonStats:
    a12: float
    u_statistic: float
    p_value: float
    medians: Tuple[float, float]


def _check(xs: Sequence[float], ys: Sequence[float]) -> None:
    if len(xs) == 0 or len(ys) == 0:
        raise EmptySample("both samples must be nonempty")


def _u(xs: Sequence[float], ys: Sequence[float]) -> float:
    wins = ties = 0
    for x in xs:
        for y in ys:
            if x > y:
                wins += 1
            elif x == y:
                ties += 1
    return wins + 0.5 * ties


def vargha_delaney(xs: Sequence[float], ys: Sequence[float]) -> float:
    """A12: probability that a draw from xs beats one from ys, ties counting half."""
    _check(xs, ys)
    return _u(xs, ys) / (len(xs) * len(ys))


def _ranks(values: Sequence[float]) -> List[float]:
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(order):
        j = i
        while j + 1 < len(order) and values[order[j + 1]] == values[order[i]]:
            j += 1
        for k in range(i, j + 1):
            ranks[order[k]] = (i + j) / 2 + 1
        i = j + 1
    return ranks


def _exact_p(xs: Sequence[float], ys: Sequence[float], u: float) -> float:
    # permutation distribution of U over all splits of the pooled sample
    pooled = list(xs) + list(ys)
    m, n = len(xs), len(ys)
    centre = m * n / 2
    observed = abs(u - centre)
    extreme = total = 0
    for idx in itertools.combinations(range(m + n), m):
        chosen = set(idx)
        a = [pooled[i] for i in idx]
        b = [pooled[i] for i in range(m + n) if i not in chosen]
        total += 1
        if abs(_u(a, b) - centre) >= observed - 1e-9:
            extreme += 1
    return extreme / total


def _normal_p(xs: Sequence[float], ys: Sequence[float], u: float) -> float:
    m, n = len(xs), len(ys)
    N = m + n
    ranks = _ranks(list(xs) + list(ys))
    counts = {}
    for r in ranks:
        counts[r] = counts.get(r, 0) + 1
    tie_term = sum(t ** 3 - t for t in counts.values())
    var = m * n / 12 * ((N + 1) - tie_term / (N * (N - 1)))
    if var <= 0:
        return 1.0
    diff = abs(u - m * n / 2) - 0.5  # continuity correction
    if diff <= 0:
        return 1.0
    z = diff / math.sqrt(var)
    return min(1.0, math.erfc(z / math.sqrt(2)))


def mann_whitney_u(xs: Sequence[float], ys: Sequence[float]) -> Tuple[float, float]:
    """Two-sided Mann-Whitney U test. Returns (U of xs, p-value).

    Exact permutation p-value when the combined size is at most
    ``EXACT_LIMIT``, otherwise the normal approximation with tie and
    continuity corrections.
    """
    _check(xs, ys)
    u = _u(xs, ys)
    if len(xs) + len(ys) <= EXACT_LIMIT:
        p = _exact_p(xs, ys, u)
    else:
        p = _normal_p(xs, ys, u)
    return u, p


def compare(xs: Sequence[float], ys: Sequence[float]) -> ComparisonStats:
    u, p = mann_whitney_u(xs, ys)
    return ComparisonStats(vargha_delaney(xs, ys), u, p, (statistics.median(xs), statistics.median(ys)))
