"""Command-line interface: ``dyntest {generate,experiment,dump-bytecode,trace}``.

Exit status is 2 for bad flags, 3 when the subject module does not parse or
compile, and 0 otherwise. Low coverage is not an error.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import logging
import sys
from pathlib import Path
from typing import List, Optional

from dyntest.compiler import CompileError, disassemble
from dyntest.experiment import emit_timeline, load_module, run_grid
from dyntest.fitness import merge
from dyntest.generators import GENERATORS, GenerationBudget
from dyntest.lang.parser import ParseError
from dyntest.search import SearchConfig
from dyntest.testcase import TestFileError, parse_test_file, render_suite
from dyntest.vm import Executor, result_as_dict

EXIT_USAGE = 2
EXIT_SUBJECT = 3

# set through dedicated flags rather than --ga-*
_DEDICATED = {"seed", "use_annotations"}


def _ga_fields():
    return [f for f in dataclasses.fields(SearchConfig) if f.name not in _DEDICATED]


def _add_budget(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--budget-seconds", type=float, help="wall-clock budget per run (default 60)")
    g.add_argument("--max-iterations", type=int, help="generations (whole-suite) or extension attempts (random)")


def _add_ga(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("search configuration overrides")
    for f in _ga_fields():
        g.add_argument(f"--ga-{f.name.replace('_', '-')}", dest=f"ga_{f.name}", type=type(f.default),
                       default=None, metavar=type(f.default).__name__.upper(), help=f"default {f.default}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyntest", description="Search-based unit test generation for .dyn modules.")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("generate", help="generate a test suite for one module")
    gen.add_argument("--module", required=True, type=Path)
    gen.add_argument("--algorithm", choices=sorted(GENERATORS), default="whole-suite")
    gen.add_argument("--type-hints", choices=("on", "off"), default="on")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", type=Path, default=Path("out"))
    _add_budget(gen)
    _add_ga(gen)

    exp = sub.add_parser("experiment", help="run the 4-configuration grid over a corpus")
    exp.add_argument("--corpus", required=True, type=Path)
    exp.add_argument("--reps", type=int, default=10)
    exp.add_argument("--seed", type=int, default=0, help="seed of the first repetition")
    exp.add_argument("--workers", type=int, default=1)
    exp.add_argument("--only", nargs="*", help="restrict to these module names")
    exp.add_argument("--out", type=Path, default=Path("results"))
    _add_budget(exp)
    _add_ga(exp)

    dump = sub.add_parser("dump-bytecode", help="print the disassembly of a module")
    dump.add_argument("file", type=Path)

    tr = sub.add_parser("trace", help="execute a test file and print the results as JSON")
    tr.add_argument("file", type=Path)
    tr.add_argument("testfile", type=Path)
    return parser


def _config(args, parser) -> SearchConfig:
    overrides = {f.name: getattr(args, f"ga_{f.name}") for f in _ga_fields()
                 if getattr(args, f"ga_{f.name}") is not None}
    try:
        return SearchConfig(**overrides)
    except ValueError as e:
        parser.error(str(e))


def _budget(args, parser) -> GenerationBudget:
    try:
        if args.max_iterations is not None:
            return GenerationBudget(max_iterations=args.max_iterations)
        return GenerationBudget(wall_clock_seconds=60.0 if args.budget_seconds is None else args.budget_seconds)
    except ValueError as e:
        parser.error(str(e))


def _generate(args, parser) -> int:
    cfg = dataclasses.replace(_config(args, parser), seed=args.seed, use_annotations=args.type_hints == "on")
    budget = _budget(args, parser)
    cm = load_module(args.module)
    report = GENERATORS[args.algorithm](cm, cfg, budget)
    out: Path = args.out
    out.mkdir(parents=True, exist_ok=True)
    test_file = out / f"test_{cm.name}.dyn"
    ex = Executor(cm, step_budget=cfg.step_budget)
    sidecar = []
    for i, t in enumerate(report.best_suite.tests):
        r = ex.execute(t)
        s = merge([r])
        sidecar.append({
            "test": f"test_{i}",
            "statements": len(t),
            "code_objects": sorted(s.executed_code_objects),
            "branches": sorted(str(b) for b in s.taken_branches),
            "exception": None if r.exception is None else dataclasses.asdict(r.exception),
        })
    if len(report.best_suite):
        test_file.write_text(render_suite(report.best_suite, cm.name))
    (out / f"test_{cm.name}.json").write_text(json.dumps(sidecar, indent=2) + "\n")
    emit_timeline(report, out / "timeline.csv")
    summary = {
        "module": cm.name,
        "algorithm": report.algorithm,
        "type_hints": args.type_hints,
        "seed": report.seed,
        "budget": dataclasses.asdict(budget),
        "final_coverage": report.final_coverage,
        "final_fitness": report.final_fitness,
        "iterations": report.iterations,
        "elapsed_seconds": report.elapsed_seconds,
        "tests": len(report.best_suite),
        "statements": sum(len(t) for t in report.best_suite.tests),
        "code_objects": len(cm.code_objects),
        "branches": len(cm.branches),
        "config": dataclasses.asdict(cfg),
    }
    if report.algorithm == "random":
        summary.update(passing=report.passing, failing=report.failing)
    (out / "report.json").write_text(json.dumps(summary, indent=2) + "\n")
    print(f"{cm.name}: coverage {report.final_coverage:.4f} with {len(report.best_suite)} tests -> {out}")
    return 0


def _experiment(args, parser) -> int:
    if args.reps < 1 or args.workers < 1:
        parser.error("--reps and --workers must be >= 1")
    cfg = _config(args, parser)
    records = run_grid(args.corpus, args.reps, _budget(args, parser), args.out, cfg,
                       base_seed=args.seed, workers=args.workers, modules=args.only)
    print(f"{len(records)} runs -> {args.out}")
    return 0


def _trace(args) -> int:
    cm = load_module(args.file)
    suite = parse_test_file(args.testfile.read_text(encoding="utf-8"), cm.classes)
    ex = Executor(cm)
    out = [{"test": f"test_{i}", **result_as_dict(ex.execute(t))} for i, t in enumerate(suite.tests)]
    print(json.dumps(out, indent=2))
    return 0


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "generate":
            return _generate(args, parser)
        if args.command == "experiment":
            return _experiment(args, parser)
        if args.command == "dump-bytecode":
            print(disassemble(load_module(args.file)), end="")
            return 0
        return _trace(args)
    except (ParseError, CompileError, TestFileError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_SUBJECT
    except FileNotFoundError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
