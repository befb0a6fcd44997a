#!/usr/bin/env python3
"""Run the full comparison grid: every corpus module, both algorithms, typed
and untyped, 10 repetitions of 60 s each. Results go to results/rq_grid/.

On one core the grid takes a few hours; modules that reach full coverage stop
early. Use --workers to spread cells over more cores.
"""
import argparse
import logging
import statistics
from pathlib import Path

from dyntest.experiment import COMPARISONS, MEAN_ROW, comparison_rows, run_grid
from dyntest.generators import GenerationBudget
from dyntest.search import SearchConfig

ROOT = Path(__file__).resolve().parents[1]


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--reps", type=int, default=10)
    ap.add_argument("--budget-seconds", type=float, default=60.0)
    ap.add_argument("--workers", type=int, default=1)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--out", type=Path, default=ROOT / "results" / "rq_grid")
    args = ap.parse_args()
    logging.basicConfig(level=logging.INFO, format="%(asctime)s %(message)s")

    records = run_grid(ROOT / "corpus", args.reps, GenerationBudget(wall_clock_seconds=args.budget_seconds),
                       args.out, SearchConfig(), base_seed=args.seed, workers=args.workers)
    rows = comparison_rows(records)
    for name in COMPARISONS:
        print(f"\n{name}")
        for r in rows:
            if r["comparison"] == name:
                print(f"  {r['module']:<22} A12={r['a12']:.3f} p={r['p']:.4f} "
                      f"median {r['median_a']:.3f} vs {r['median_b']:.3f}")
    mean = [r for r in rows if r["module"] == MEAN_ROW]
    print("\n" + ", ".join(f"{r['comparison']}: {r['a12']:.3f}" for r in mean))
    print(f"median coverage over all runs: {statistics.median(r.final_coverage for r in records):.3f}")


if __name__ == "__main__":
    main()
