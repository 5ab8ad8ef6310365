"""``bench`` command line interface.

Subcommands:

* ``bench run --config cfg.json --out dir [--jobs N] [--seed S]`` --
  execute the grid, write runs.csv, profile CSVs and summary.json.
* ``bench profile --runs runs.csv --metric fevals --out profile.csv`` --
  recompute a performance profile from stored records.
* ``bench check`` -- gradient checks and solver invariant spot checks.

Exit code 0 on success, 2 on validation errors, 1 on runtime failures.
"""

import argparse
import json
import sys

import numpy as np

from . import bench
from .driver import TrConfig, solve
from .problems import fd_gradient_check, get_problem, problem_names


def _cmd_run(args) -> int:
    try:
        grid = bench.load_config(args.config)
    except (OSError, ValueError, json.JSONDecodeError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    if args.seed is not None:
        grid.seed = args.seed

    def progress(rec):
        print(f"  {rec.problem:28s} {rec.label:24s} {rec.status:14s} "
              f"fevals={rec.fevals:6d} |g|={rec.final_gnorm:.3e}")

    records = bench.run_grid(grid, jobs=args.jobs,
                             progress=progress if args.verbose else None)
    curves = {m: bench.performance_profile(records, m)
              for m in ("fevals", "wall_ms")}
    try:
        paths = bench.emit(records, curves, args.out)
    except OSError as exc:
        print(f"cannot write outputs under {args.out}: {exc}", file=sys.stderr)
        return 1
    solved = sum(1 for r in records if r.solved)
    print(f"{len(records)} runs ({solved} converged); outputs:")
    for name, path in paths.items():
        print(f"  {name}: {path}")
    return 0


def _cmd_profile(args) -> int:
    try:
        records = bench.read_runs_csv(args.runs)
        curves = bench.performance_profile(records, args.metric)
        bench.write_profile_csv(curves, args.out)
    except (OSError, ValueError) as exc:
        print(f"profile error: {exc}", file=sys.stderr)
        return 2
    print(f"wrote {args.out} ({len(curves)} curves)")
    return 0


def _cmd_check(args) -> int:
    failures = 0
    n = args.n
    print(f"gradient checks (central differences, n={n}):")
    for name in problem_names():
        problem = get_problem(name, n)
        err = fd_gradient_check(problem, problem.x0)
        ok = err <= 1e-5
        failures += 0 if ok else 1
        print(f"  {name:28s} max rel err {err:.3e}  {'ok' if ok else 'FAIL'}")

    print("solver invariants (quadratic run, m=3):")
    problem = get_problem("gen_quad_spectrum", 48)
    for solver in ("mss", "lsr1-bb", "lsr1-id"):
        config = TrConfig(solver=solver, m=3, option="half-sum-bb")
        report = solve(problem, config)
        ok = (report.fevals == report.gevals == report.iters + 1
              and report.status == "converged")
        failures += 0 if ok else 1
        print(f"  {solver:8s} status={report.status:12s} iters={report.iters:4d} "
              f"fevals={report.fevals:4d}  {'ok' if ok else 'FAIL'}")

    rng = np.random.default_rng(0)
    from .init_params import InitOption, choose_params
    from .mss_core import PairBuffer, apply_B, build_compact, spectral_view, \
        try_accept_pair

    print("secant identity spot checks:")
    bad = 0
    for _ in range(20):
        nn, l = 30, 4
        buf = PairBuffer(nn, l)
        while buf.l < l:
            s = rng.standard_normal(nn)
            y = s + 0.3 * rng.standard_normal(nn)
            try_accept_pair(buf, s, y)
        zeta, zetaC = choose_params(InitOption("half-sum-bb"), buf)
        view = spectral_view(build_compact(buf, zeta, zetaC))
        s0, y0 = buf.newest()
        err = np.linalg.norm(apply_B(view, s0) - y0) / np.linalg.norm(y0)
        if err > 1e-8:
            bad += 1
    failures += bad
    print(f"  20 random builds, {bad} violations")

    if failures:
        print(f"{failures} check(s) failed")
        return 1
    print("all checks passed")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="bench",
                                     description="MSS trust-region benchmark harness")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run a solver grid from a config file")
    p_run.add_argument("--config", required=True)
    p_run.add_argument("--out", required=True)
    p_run.add_argument("--jobs", type=int, default=1)
    p_run.add_argument("--seed", type=int, default=None)
    p_run.add_argument("--verbose", action="store_true")
    p_run.set_defaults(func=_cmd_run)

    p_prof = sub.add_parser("profile", help="profile from a runs.csv")
    p_prof.add_argument("--runs", required=True)
    p_prof.add_argument("--metric", choices=("fevals", "wall_ms"),
                        default="fevals")
    p_prof.add_argument("--out", required=True)
    p_prof.set_defaults(func=_cmd_profile)

    p_check = sub.add_parser("check", help="gradient and invariant checks")
    p_check.add_argument("--n", type=int, default=20)
    p_check.set_defaults(func=_cmd_check)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
