"""Suite-level coverage and fitness from per-test execution traces."""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional

from dyntest.compiler import Branch, CompiledModule
from dyntest.distance import INF
from dyntest.vm import ExecutionResult


class MixedModuleError(ValueError):
    pass


class DegenerateModule(ValueError):
    pass


@dataclass(frozen=True)
class SuiteExecutionSummary:
    executed_code_objects: FrozenSet[int] = frozenset()
    # predicate id -> (min true distance, min false distance), over all tests
    predicate_distances: Dict[int, tuple] = field(default_factory=dict, hash=False)
    execution_count_per_predicate: Dict[int, int] = field(default_factory=dict, hash=False)

    @property
    def min_distance_per_branch(self) -> Dict[Branch, float]:
        out = {}
        for pid, (dt, df) in sorted(self.predicate_distances.items()):
            out[Branch(pid, True)] = dt
            out[Branch(pid, False)] = df
        return out

    @property
    def taken_branches(self) -> FrozenSet[Branch]:
        return frozenset(b for b, d in self.min_distance_per_branch.items() if d == 0)

    def d_min(self, b: Branch) -> float:
        pair = self.predicate_distances.get(b.predicate)
        if pair is None:
            return INF
        return pair[0] if b.polarity else pair[1]


def merge(results: Iterable[ExecutionResult], num_predicates: Optional[int] = None) -> SuiteExecutionSummary:
    """Union code objects, take per-branch minima, sum predicate counts.

    When ``num_predicates`` is given, a predicate id outside the module's id
    space raises :class:`MixedModuleError`.
    """
    executed: set = set()
    dist: Dict[int, list] = {}
    counts: Dict[int, int] = {}
    for r in results:
        executed |= r.executed_code_objects
        for pid, (dt, df) in r.predicate_distances.items():
            if num_predicates is not None and not 0 <= pid < num_predicates:
                raise MixedModuleError(f"predicate id {pid} outside module with {num_predicates} predicates")
            cur = dist.get(pid)
            if cur is None:
                dist[pid] = [dt, df]
            else:
                if dt < cur[0]:
                    cur[0] = dt
                if df < cur[1]:
                    cur[1] = df
        for pid, cnt in r.predicate_counts.items():
            counts[pid] = counts.get(pid, 0) + cnt
    return SuiteExecutionSummary(
        frozenset(executed),
        {p: (d[0], d[1]) for p, d in dist.items()},
        counts,
    )


def normalize(x: float) -> float:
    """x / (x + 1), with infinity mapping to 1."""
    if x < 0:
        raise ValueError(f"distance must be non-negative, got {x}")
    if math.isinf(x):
        return 1.0
    return x / (x + 1)


def branch_fitness(b: Branch, s: SuiteExecutionSummary) -> float:
    d = s.d_min(b)
    if d == 0:
        return 0.0
    if s.execution_count_per_predicate.get(b.predicate, 0) >= 2:
        return normalize(d)
    return 1.0


def suite_fitness(s: SuiteExecutionSummary, cm: CompiledModule) -> float:
    """|C| - |C_T| + sum of branch fitness over all branches; 0 is optimal."""
    missing = len(cm.code_objects) - len(s.executed_code_objects)
    return missing + sum(branch_fitness(b, s) for b in cm.branches)


def coverage(s: SuiteExecutionSummary, cm: CompiledModule) -> float:
    """(|C_T| + |B_T|) / (|C| + |B|)."""
    total = len(cm.code_objects) + len(cm.branches)
    if total == 0:
        raise DegenerateModule("module has no code objects and no branches")
    return (len(s.executed_code_objects) + len(s.taken_branches)) / total


def covered_goals(s: SuiteExecutionSummary) -> FrozenSet:
    """Everything covered, as a set of goal keys (code ids and branches)."""
    return frozenset(("code", c) for c in s.executed_code_objects) | frozenset(
        ("branch", b.predicate, b.polarity) for b in s.taken_branches
    )
