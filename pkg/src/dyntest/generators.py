"""Test generation algorithms: whole-suite evolutionary search and
feedback-directed random generation.

Both share the same report shape. Iteration budgets give reproducible runs;
wall-clock budgets do not.
"""
from __future__ import annotations

import logging
import time
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

from dyntest.compiler import CompiledModule
from dyntest.distance import DistanceConfig
from dyntest.fitness import coverage, covered_goals, merge, suite_fitness
from dyntest.search import (
    SearchConfig,
    crossover,
    insert_random_statement,
    make_rng,
    mutate_suite,
    sample_random_testcase,
)
from dyntest.testcase import TestCase, TestSuite
from dyntest.vm import Executor

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenerationBudget:
    wall_clock_seconds: Optional[float] = None
    max_iterations: Optional[int] = None

    def __post_init__(self) -> None:
        if self.wall_clock_seconds is None and self.max_iterations is None:
            raise ValueError("set wall_clock_seconds, max_iterations, or both")
        if self.wall_clock_seconds is not None and self.wall_clock_seconds < 0:
            raise ValueError("wall_clock_seconds must be >= 0")
        if self.max_iterations is not None and self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass
class GenerationReport:
    algorithm: str
    best_suite: TestSuite
    final_coverage: float
    final_fitness: float
    timeline: List[Tuple[float, float]]
    iterations: int
    seed: int
    elapsed_seconds: float
    # population-best fitness after each generation (whole-suite only)
    fitness_history: List[float] = field(default_factory=list)
    # tests added to the archives (random only)
    passing: int = 0
    failing: int = 0


class _Clock:
    def __init__(self, budget: GenerationBudget) -> None:
        self.budget = budget
        self.start = time.monotonic()

    def elapsed(self) -> float:
        return time.monotonic() - self.start

    def exhausted(self, iterations: int) -> bool:
        b = self.budget
        if b.max_iterations is not None and iterations >= b.max_iterations:
            return True
        return b.wall_clock_seconds is not None and self.elapsed() >= b.wall_clock_seconds

    def end_time(self) -> float:
        if self.budget.wall_clock_seconds is not None:
            return max(self.budget.wall_clock_seconds, self.elapsed())
        return self.elapsed()


class _Timeline:
    """Coverage over time, recorded only at improvements."""

    def __init__(self, baseline: float) -> None:
        self.rows: List[Tuple[float, float]] = [(0.0, baseline)]

    def improve(self, t: float, cov: float) -> None:
        if cov > self.rows[-1][1]:
            self.rows.append((t, cov))

    def close(self, t: float, final: float) -> List[Tuple[float, float]]:
        self.rows.append((max(t, self.rows[-1][0]), final))
        return self.rows


class SuiteEvaluator:
    """Fitness and coverage of suites, with the import-only run always merged in."""

    def __init__(self, cm: CompiledModule, cfg: SearchConfig) -> None:
        self.cm = cm
        self.executor = Executor(cm, DistanceConfig(cfg.k), cfg.step_budget)
        self.baseline = self.executor.baseline
        self.num_predicates = len(cm.predicates)

    def summary(self, tests: Sequence[TestCase]):
        return merge([self.baseline] + [self.executor.execute(t) for t in tests], self.num_predicates)

    def evaluate(self, tests: Sequence[TestCase]) -> Tuple[float, float]:
        s = self.summary(tests)
        return suite_fitness(s, self.cm), coverage(s, self.cm)

    def goals(self, t: Optional[TestCase] = None, result=None) -> frozenset:
        if result is None and t is not None:
            result = self.executor.execute(t)
        results = [self.baseline] if result is None else [self.baseline, result]
        return covered_goals(merge(results))


def minimize(tests: Sequence[TestCase], ev: SuiteEvaluator,
             per_test: Optional[Sequence[frozenset]] = None) -> TestSuite:
    """Greedy goal-preserving reduction.

    Tests are visited by descending number of covered goals (ties by
    position) and kept only if they add a goal not yet covered. At least one
    test is kept from a nonempty input. ``per_test`` may supply the goals of
    each test when they are already known.
    """
    if not tests:
        return TestSuite(())
    if per_test is None:
        per_test = [ev.goals(t) for t in tests]
    order = sorted(range(len(tests)), key=lambda i: (-len(per_test[i]), i))
    covered = set(ev.goals())
    keep = []
    for i in order:
        new = per_test[i] - covered
        if new:
            keep.append(i)
            covered |= new
    if not keep:
        keep = [order[0]]
    return TestSuite(tuple(tests[i] for i in sorted(keep)))


def _size(suite: TestSuite) -> int:
    return sum(len(t) for t in suite.tests)


def whole_suite_generate(cm: CompiledModule, cfg: SearchConfig, budget: GenerationBudget) -> GenerationReport:
    """Generational GA over test suites minimizing the suite fitness.

    Selection is a tournament on (fitness, total statements); the best
    ``cfg.elitism`` suites are copied unchanged into each new generation.
    """
    rng = make_rng(cfg.seed)
    clock = _Clock(budget)
    pool = cm.callable_pool(cfg.use_annotations)
    constants = cm.constants
    ev = SuiteEvaluator(cm, cfg)
    _, base_cov = ev.evaluate(())
    timeline = _Timeline(base_cov)

    def random_suite() -> TestSuite:
        n = rng.randint(1, min(cfg.max_suite_size, cfg.initial_suite_size_max))
        tests = [sample_random_testcase(pool, constants, cfg, rng) for _ in range(n)]
        return TestSuite(tuple(t for t in tests if len(t)) or (tests[0],))

    population: List[TestSuite] = []
    scores: List[Tuple[float, float]] = []
    for i in range(cfg.population):
        if i > 0 and budget.wall_clock_seconds is not None and clock.exhausted(0):
            break
        population.append(random_suite())
        scores.append(ev.evaluate(population[-1].tests))

    def rank_key(i: int):
        return (scores[i][0], _size(population[i]))

    best_suite, best_cov, best_fit = None, -1.0, float("inf")

    def track() -> None:
        nonlocal best_suite, best_cov, best_fit
        for i, (f, c) in enumerate(scores):
            if (c, -f) > (best_cov, -best_fit):
                best_suite, best_cov, best_fit = population[i], c, f
        timeline.improve(clock.elapsed(), best_cov)

    track()
    history = [min(f for f, _ in scores)]
    generation = 0

    def tournament() -> TestSuite:
        picks = [rng.randrange(len(population)) for _ in range(cfg.tournament_size)]
        return population[min(picks, key=rank_key)]

    while best_fit > 0 and best_cov < 1.0 and not clock.exhausted(generation):
        ranked = sorted(range(len(population)), key=rank_key)
        nxt = [population[i] for i in ranked[: cfg.elitism]]
        nxt_scores = [scores[i] for i in ranked[: cfg.elitism]]
        while len(nxt) < cfg.population:
            p1, p2 = tournament(), tournament()
            if rng.random() < cfg.crossover_rate:
                o1, o2 = crossover(p1, p2, rng)
            else:
                o1, o2 = p1, p2
            for o in (o1, o2):
                if len(nxt) < cfg.population:
                    o = mutate_suite(o, pool, constants, cfg, rng)
                    nxt.append(o)
                    nxt_scores.append(ev.evaluate(o.tests))
        population, scores = nxt, nxt_scores
        generation += 1
        track()
        history.append(min(f for f, _ in scores))

    final = minimize(best_suite.tests, ev)
    final_fit, final_cov = ev.evaluate(final.tests)
    if final_cov != best_cov:
        raise AssertionError("minimization changed coverage")
    return GenerationReport(
        algorithm="whole-suite",
        best_suite=final,
        final_coverage=final_cov,
        final_fitness=final_fit,
        timeline=timeline.close(clock.end_time(), final_cov),
        iterations=generation,
        seed=cfg.seed,
        elapsed_seconds=clock.elapsed(),
        fitness_history=history,
    )


def random_generate(cm: CompiledModule, cfg: SearchConfig, budget: GenerationBudget) -> GenerationReport:
    """Feedback-directed random generation with passing and failing archives.

    Each iteration extends a stored passing test (or the empty test) by one
    random call appended at the end. Non-raising results go to the passing
    archive, raising ones to the failing archive. Duplicates are discarded.
    """
    rng = make_rng(cfg.seed)
    clock = _Clock(budget)
    pool = cm.callable_pool(cfg.use_annotations)
    constants = cm.constants
    ev = SuiteEvaluator(cm, cfg)
    total = len(cm.code_objects) + len(cm.branches)
    goals = set(ev.goals())
    timeline = _Timeline(len(goals) / total)
    passing: List[TestCase] = []
    failing: List[TestCase] = []
    archive_goals: Dict[TestCase, frozenset] = {}
    seen = set()
    empty = TestCase(())
    iterations = 0
    while len(goals) < total and not clock.exhausted(iterations):
        iterations += 1
        k = rng.randrange(len(passing) + 1)
        base = passing[k] if k < len(passing) else empty
        ext = insert_random_statement(base, pool, constants, cfg, rng, append=True)
        if ext is base or ext in seen:
            continue
        seen.add(ext)
        result = ev.executor.execute(ext)
        (passing if result.passed else failing).append(ext)
        before = len(goals)
        archive_goals[ext] = ev.goals(result=result)
        goals |= archive_goals[ext]
        if len(goals) > before:
            timeline.improve(clock.elapsed(), len(goals) / total)

    archive = passing + failing
    final = minimize(archive, ev, [archive_goals[t] for t in archive])
    final_fit, final_cov = ev.evaluate(final.tests)
    if abs(final_cov - len(goals) / total) > 1e-12:
        raise AssertionError("minimization changed coverage")
    return GenerationReport(
        algorithm="random",
        best_suite=final,
        final_coverage=final_cov,
        final_fitness=final_fit,
        timeline=timeline.close(clock.end_time(), final_cov),
        iterations=iterations,
        seed=cfg.seed,
        elapsed_seconds=clock.elapsed(),
        passing=len(passing),
        failing=len(failing),
    )


GENERATORS: Dict[str, Callable[[CompiledModule, SearchConfig, GenerationBudget], GenerationReport]] = {
    "whole-suite": whole_suite_generate,
    "random": random_generate,
}
