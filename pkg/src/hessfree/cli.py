"""Command-line benchmark harness.

``hessfree run`` regenerates the deconvolution benchmark (seeded problem
generation, solver sweep, median curves as CSV plus figures); ``hessfree
verify`` runs the oracle self-checks on a small instance.
"""

from __future__ import annotations

import argparse
import sys

from .bench import DEFAULT_SOLVERS, ExperimentSpec, run_experiment
from .solvers import BETA_RULES, SOLVERS, STEP_RULES, SolverConfig
from .verify import run_checks


def _positive_int(value: str) -> int:
    n = int(value)
    if n < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="hessfree",
        description="Matrix-free second-order optimization benchmark")
    sub = p.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run the benchmark experiment")
    run.add_argument("--n", type=_positive_int, default=100,
                     help="grid side length")
    run.add_argument("--realizations", type=_positive_int, default=100)
    run.add_argument("--seed", type=int, default=0)
    run.add_argument("--sigma", type=float, default=3.0,
                     help="blur width in pixels")
    run.add_argument("--solver", action="append", choices=sorted(SOLVERS),
                     help="solver to run (repeatable; default: all)")
    run.add_argument("--beta-rule", choices=BETA_RULES, default="daniel",
                     help="beta rule for the generic cg solver entries")
    run.add_argument("--step-rule", choices=STEP_RULES, default="newton")
    run.add_argument("--max-iters", type=_positive_int, default=200)
    run.add_argument("--inner-iters", type=_positive_int, default=12)
    run.add_argument("--grad-tol", type=float, default=1e-8)
    run.add_argument("--ls-points", type=_positive_int, default=50)
    run.add_argument("--ls-lo", type=float, default=0.1)
    run.add_argument("--ls-hi", type=float, default=3.3)
    run.add_argument("--out", default="bench_out")
    run.add_argument("--no-plots", action="store_true",
                     help="skip figure rendering")

    ver = sub.add_parser("verify", help="run the oracle self-checks")
    ver.add_argument("--n", type=_positive_int, default=4)
    ver.add_argument("--seed", type=int, default=1)
    return p


def cli_main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)

    if args.command == "verify":
        ok = run_checks(n=args.n, seed=args.seed)
        print("all checks passed" if ok else "some checks FAILED")
        return 0 if ok else 1

    try:
        cfg = SolverConfig(max_iters=args.max_iters, grad_tol=args.grad_tol,
                           step_rule=args.step_rule, beta_rule=args.beta_rule,
                           inner_iters=args.inner_iters,
                           ls_points=args.ls_points, ls_lo=args.ls_lo,
                           ls_hi=args.ls_hi)
        spec = ExperimentSpec(n=args.n, num_realizations=args.realizations,
                              sigma=args.sigma, master_seed=args.seed,
                              solvers=tuple(args.solver or DEFAULT_SOLVERS),
                              config=cfg, output_dir=args.out)
    except ValueError as exc:
        print(f"invalid arguments: {exc}", file=sys.stderr)
        return 2

    from .report import emit_csv, emit_plots
    try:
        result = run_experiment(spec)
        written = emit_csv(result, spec.output_dir)
        if not args.no_plots:
            written += emit_plots(result, spec.output_dir)
    except Exception as exc:
        print(f"experiment failed: {exc}", file=sys.stderr)
        return 1
    for path in written:
        print(path)
    for name, agg in result.per_solver.items():
        print(f"{name}: median iterations to tolerance "
              f"{agg.median_iters_to_tol:g}")
    return 0


def main() -> None:
    sys.exit(cli_main())


if __name__ == "__main__":
    main()
