"""Command-line entry point ``seqdfo``.

Exit codes: 0 success, 1 configuration error, 2 runtime failure,
3 verification-suite failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import bench, verify
from .errors import CatalogError, ConfigError, ParameterError
from .oracle import CATALOG_NAMES, builtin_problem
from .search import SearchConfig, TestKind, run_direct_search
from .stochastics import RngStream

EXIT_OK, EXIT_CONFIG, EXIT_RUNTIME, EXIT_VERIFY = 0, 1, 2, 3


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError(f"seed must be an unsigned 64-bit integer, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="seqdfo", description="Sequential-test direct search toolkit.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a benchmark experiment")
    p.add_argument("--config", required=True, help="flat key = value experiment file")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("profiles", help="recompute profiles from a run's records")
    p.add_argument("--records", required=True, help="records.csv written by 'run'")
    p.add_argument("--tau", type=float, default=0.1, help="convergence tolerance in (0, 1)")
    p.add_argument("--out", required=True, help="output directory")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("--suite", default="all", choices=("all",) + verify.SUITES)
    p.add_argument("--trials", type=int, default=100_000)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--out", help="also write the report CSV here")

    p = sub.add_parser("trace", help="print a per-iteration table for one run")
    p.add_argument("--problem", required=True, choices=CATALOG_NAMES)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--solver", choices=("st", "ft"), default="st")
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--seed", type=_u64, default=0)
    p.add_argument("--budget", type=int, default=10_000)
    return parser


def _cmd_run(args) -> int:
    try:
        text = Path(args.config).read_text()
    except OSError as exc:
        raise ConfigError("config", f"cannot read {args.config}: {exc.strerror}") from None
    config = bench.parse_config(text)
    result = bench.run_experiment(config, args.out)
    solved = sum(r.t_evals is not bench.UNSOLVED for r in result.records)
    print(f"{len(result.records)} runs, {solved} solved; outputs in {args.out}")
    return EXIT_OK


def _cmd_profiles(args) -> int:
    records, budget = bench.rescore(args.records, args.tau)
    if budget is None:
        budget = max((r.t_evals for r in records if r.t_evals is not bench.UNSOLVED), default=1)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    bench.write_records_csv(records, out / "records.csv")
    bench.write_profiles(records, out, budget)
    print(f"profiles for {len(records)} records at tau = {args.tau} in {out}")
    return EXIT_OK


def _cmd_verify(args) -> int:
    results = verify.run_suite(args.suite, args.trials, args.seed)
    print(verify.report_text(results))
    if args.out:
        Path(args.out).write_text(verify.report_csv(results))
    failed = sum(not r.passed for r in results)
    print(f"{len(results) - failed}/{len(results)} claims passed")
    return EXIT_OK if failed == 0 else EXIT_VERIFY


def _cmd_trace(args) -> int:
    problem = builtin_problem(args.problem, args.n)
    kind = TestKind.SEQUENTIAL if args.solver == "st" else TestKind.FIXED_SAMPLE
    config = SearchConfig(test_kind=kind, sigma2_f=args.sigma2, budget=args.budget)
    trace = run_direct_search(config, problem, RngStream(args.seed))
    print(f"{'k':>6} {'delta':>12} {'f(x)':>14} {'f(trial)':>14} {'m':>7} {'acc':>4} {'cap':>4} {'calls':>8}")
    for r in trace.records:
        print(f"{r.k:>6} {r.delta_k:>12.5g} {r.true_f:>14.7g} {r.trial_true_f:>14.7g} {r.samples_m:>7} "
              f"{'y' if r.accepted else 'n':>4} {'y' if r.capped else 'n':>4} {r.oracle_calls_cum:>8}")
    print(f"terminated: {trace.terminated_reason.value}; calls {trace.oracle_calls}; "
          f"best f {trace.best_true_f:.7g}")
    return EXIT_OK


_COMMANDS = {"run": _cmd_run, "profiles": _cmd_profiles, "verify": _cmd_verify, "trace": _cmd_trace}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return _COMMANDS[args.command](args)
    except (ConfigError, CatalogError, ParameterError) as exc:
        print(f"seqdfo: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (OSError, RuntimeError, KeyError, ValueError) as exc:
        print(f"seqdfo: error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
