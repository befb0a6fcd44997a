"""The four-configuration experiment grid and its statistical summary.

Every module of a corpus is run under {whole-suite, random} x {typed,
untyped} for a number of repetitions. Repetition ``r`` uses seed
``base_seed + r`` in all four configurations.
"""
from __future__ import annotations

import csv
import json
import logging
import os
import statistics
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from dyntest.compiler import CompiledModule, compile_module
from dyntest.generators import GENERATORS, GenerationBudget, GenerationReport
from dyntest.lang import parse_module
from dyntest.search import SearchConfig
from dyntest.stats import compare
from dyntest.testcase import render_suite

log = logging.getLogger(__name__)

ALGORITHMS = ("whole-suite", "random")
RUNS_HEADER = ["module", "algorithm", "annotations", "seed", "final_coverage", "iterations", "timeline"]
STATS_HEADER = ["module", "comparison", "a12", "u", "p", "median_a", "median_b"]
MEAN_ROW = "(mean over modules)"
POOLED_ROW = "(pooled)"


@dataclass(frozen=True)
class RunRecord:
    module: str
    algorithm: str
    annotations: bool
    seed: int
    final_coverage: float
    iterations: int
    timeline: str


def load_module(path: os.PathLike) -> CompiledModule:
    path = Path(path)
    return compile_module(parse_module(path.read_text(encoding="utf-8"), path.stem))


def corpus_files(corpus: os.PathLike) -> List[Path]:
    files = sorted(Path(corpus).glob("*.dyn"))
    if not files:
        raise FileNotFoundError(f"no .dyn modules in {corpus}")
    return files


def emit_timeline(report: GenerationReport, path: os.PathLike) -> None:
    """Write ``elapsed_seconds,coverage`` rows; coverage never decreases."""
    try:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["elapsed_seconds", "coverage"])
            for t, c in report.timeline:
                w.writerow([f"{t:.6f}", repr(c)])
    except OSError as e:
        raise OSError(f"cannot write timeline {path}: {e}") from e


def read_timeline(path: os.PathLike) -> List[Tuple[float, float]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if rows[0] != ["elapsed_seconds", "coverage"]:
        raise ValueError(f"bad timeline header in {path}")
    return [(float(a), float(b)) for a, b in rows[1:]]


def _run_cell(args) -> RunRecord:
    path, algorithm, annotations, seed, cfg, budget, out = args
    cm = load_module(path)
    cfg = replace(cfg, seed=seed, use_annotations=annotations)
    report = GENERATORS[algorithm](cm, cfg, budget)
    tag = f"{cm.name}_{algorithm}_{'typed' if annotations else 'untyped'}_{seed}"
    tl = Path(out) / "timelines" / f"{tag}.csv"
    emit_timeline(report, tl)
    if len(report.best_suite):
        (Path(out) / "suites" / f"{tag}.dyn").write_text(render_suite(report.best_suite, cm.name))
    log.info("%s coverage %.4f", tag, report.final_coverage)
    return RunRecord(cm.name, algorithm, annotations, seed, report.final_coverage,
                     report.iterations, str(tl.relative_to(out)))


def run_grid(corpus: os.PathLike, reps: int, budget: GenerationBudget, out: os.PathLike,
             cfg: SearchConfig = SearchConfig(), base_seed: int = 0, workers: int = 1,
             modules: Optional[Sequence[str]] = None) -> List[RunRecord]:
    """Run every cell, write ``runs.csv``, ``stats.csv`` and ``experiment.json``.

    Each cell also leaves its timeline and final suite under ``timelines/``
    and ``suites/``. ``runs.csv`` is rewritten as cells finish, so an
    interrupted grid keeps its completed runs.
    """
    out = Path(out)
    (out / "timelines").mkdir(parents=True, exist_ok=True)
    (out / "suites").mkdir(exist_ok=True)
    files = corpus_files(corpus)
    if modules:
        files = [f for f in files if f.stem in set(modules)]
    cells = [
        (str(f), alg, ann, base_seed + r, cfg, budget, str(out))
        for f in files for r in range(reps) for alg in ALGORITHMS for ann in (True, False)
    ]
    records: List[RunRecord] = []
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            for rec in ex.map(_run_cell, cells):
                records.append(rec)
                write_runs(records, out / "runs.csv")
    else:
        for c in cells:
            records.append(_run_cell(c))
            write_runs(records, out / "runs.csv")
    write_stats(records, out / "stats.csv")
    meta = {
        "modules": [f.stem for f in files],
        "reps": reps,
        "base_seed": base_seed,
        "budget": asdict(budget),
        "config": asdict(cfg),
        "runs": len(records),
    }
    (out / "experiment.json").write_text(json.dumps(meta, indent=2) + "\n")
    return records


def write_runs(records: Iterable[RunRecord], path: os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(RUNS_HEADER)
        for r in records:
            w.writerow([r.module, r.algorithm, int(r.annotations), r.seed,
                        repr(r.final_coverage), r.iterations, r.timeline])


def read_runs(path: os.PathLike) -> List[RunRecord]:
    with open(path, newline="") as fh:
        rows = list(csv.DictReader(fh))
    return [
        RunRecord(r["module"], r["algorithm"], r["annotations"] == "1", int(r["seed"]),
                  float(r["final_coverage"]), int(r["iterations"]), r["timeline"])
        for r in rows
    ]


def samples(records: Iterable[RunRecord]) -> Dict[Tuple[str, str, bool], List[float]]:
    """(module, algorithm, annotations) -> coverages ordered by seed."""
    out: Dict[Tuple[str, str, bool], List[Tuple[int, float]]] = {}
    for r in records:
        out.setdefault((r.module, r.algorithm, r.annotations), []).append((r.seed, r.final_coverage))
    return {k: [c for _, c in sorted(v)] for k, v in out.items()}


# comparison name -> (config a, config b) as (algorithm, annotations)
COMPARISONS = {
    "whole-suite vs random (typed)": (("whole-suite", True), ("random", True)),
    "whole-suite vs random (untyped)": (("whole-suite", False), ("random", False)),
    "typed vs untyped (whole-suite)": (("whole-suite", True), ("whole-suite", False)),
    "typed vs untyped (random)": (("random", True), ("random", False)),
}


def comparison_rows(records: Sequence[RunRecord]) -> List[dict]:
    """One row per module and comparison, plus two cross-module aggregates:
    the mean of the per-module values and a test on the pooled samples."""
    data = samples(records)
    modules = sorted({r.module for r in records})
    rows = []
    for name, (a, b) in COMPARISONS.items():
        per_module = []
        pooled_a: List[float] = []
        pooled_b: List[float] = []
        for m in modules:
            xs, ys = data.get((m,) + a), data.get((m,) + b)
            if not xs or not ys:
                continue
            s = compare(xs, ys)
            per_module.append(s)
            pooled_a += xs
            pooled_b += ys
            rows.append({"module": m, "comparison": name, "a12": s.a12, "u": s.u_statistic,
                         "p": s.p_value, "median_a": s.medians[0], "median_b": s.medians[1]})
        if per_module:
            rows.append({
                "module": MEAN_ROW, "comparison": name,
                "a12": statistics.fmean(s.a12 for s in per_module),
                "u": statistics.fmean(s.u_statistic for s in per_module),
                "p": statistics.fmean(s.p_value for s in per_module),
                "median_a": statistics.fmean(s.medians[0] for s in per_module),
                "median_b": statistics.fmean(s.medians[1] for s in per_module),
            })
            s = compare(pooled_a, pooled_b)
            rows.append({"module": POOLED_ROW, "comparison": name, "a12": s.a12, "u": s.u_statistic,
                         "p": s.p_value, "median_a": s.medians[0], "median_b": s.medians[1]})
    return rows


def write_stats(records: Sequence[RunRecord], path: os.PathLike) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=STATS_HEADER)
        w.writeheader()
        for row in comparison_rows(records):
            w.writerow(row)


def read_stats(path: os.PathLike) -> List[dict]:
    with open(path, newline="") as fh:
        return [
            {k: (v if k in ("module", "comparison") else float(v)) for k, v in row.items()}
            for row in csv.DictReader(fh)
        ]
