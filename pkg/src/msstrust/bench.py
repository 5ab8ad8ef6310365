"""Benchmark harness: solver x option x memory grids over the problem
suite, run records, and Dolan-More performance profiles.

Outputs: ``runs.csv`` (one record per grid cell), ``profile_<metric>.csv``
(a common tau grid with one pi column per solver label) and
``summary.json`` (solved counts, total function evaluations over the
commonly-solved problems, and pairwise percent improvements).
"""

import concurrent.futures
import csv
import json
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .driver import SOLVER_KINDS, TrConfig, solve
from .init_params import OPTION_TAGS
from .problems import get_problem, problem_names

PROFILE_SAMPLES = 512

RUNS_HEADER = ["problem", "n", "solver", "m", "option", "status", "iters",
               "fevals", "gevals", "final_gnorm", "final_f", "wall_ms",
               "fallback_steps"]


@dataclass
class SolverSpec:
    type: str
    m: int = 5
    option: str = "half-sum-bb"

    @property
    def label(self) -> str:
        if self.type == "mss":
            return f"mss(m={self.m},{self.option})"
        return f"{self.type}(m={self.m})"


@dataclass
class RunRecord:
    problem: str
    n: int
    solver: str
    m: int
    option: str
    status: str
    iters: int
    fevals: int
    gevals: int
    final_gnorm: float
    final_f: float
    wall_ms: float
    fallback_steps: int

    @property
    def label(self) -> str:
        if self.solver == "mss":
            return f"mss(m={self.m},{self.option})"
        return f"{self.solver}(m={self.m})"

    @property
    def solved(self) -> bool:
        return self.status == "converged"


@dataclass
class ProfileCurve:
    solver_label: str
    points: list = field(default_factory=list)  # (tau, pi) pairs


@dataclass
class GridConfig:
    problems: list
    n: int = 1000
    solvers: list = field(default_factory=list)
    budgets: dict = field(default_factory=dict)
    pair_rule: str = "mss-positive"
    seed: int = 0


def load_config(path) -> GridConfig:
    """Parse and validate a grid config JSON file."""
    with open(path) as fh:
        raw = json.load(fh)
    return parse_config(raw)


def parse_config(raw: dict) -> GridConfig:
    problems = raw.get("problems", "all")
    if problems == "all":
        problems = problem_names()
    if not isinstance(problems, list) or not problems:
        raise ValueError("config field 'problems' must be a non-empty list or 'all'")
    known = set(problem_names())
    unknown = [p for p in problems if p not in known]
    if unknown:
        raise ValueError(f"unknown problems in config: {unknown}")
    solvers = []
    for entry in raw.get("solvers", []):
        kind = entry.get("type")
        if kind not in SOLVER_KINDS:
            raise ValueError(f"unknown solver type {kind!r}; known: {SOLVER_KINDS}")
        option = entry.get("option", "half-sum-bb")
        if kind == "mss" and option not in OPTION_TAGS:
            raise ValueError(f"unknown init option {option!r}; known: {OPTION_TAGS}")
        solvers.append(SolverSpec(type=kind, m=int(entry.get("m", 5)), option=option))
    if not solvers:
        raise ValueError("config must name at least one solver")
    n = int(raw.get("n", 1000))
    if n < 4 or n % 4:
        raise ValueError("n must be >= 4 and divisible by 4")
    budgets = raw.get("budgets", {})
    allowed = {"max_iters", "max_fevals", "tau_g", "delta0", "tau", "tau_hat"}
    bad = set(budgets) - allowed
    if bad:
        raise ValueError(f"unknown budget overrides: {sorted(bad)}")
    return GridConfig(problems=problems, n=n, solvers=solvers, budgets=budgets,
                      pair_rule=raw.get("pair_rule", "mss-positive"),
                      seed=int(raw.get("seed", 0)))


def _make_config(spec: SolverSpec, grid: GridConfig) -> TrConfig:
    cfg = TrConfig(solver=spec.type, m=spec.m, option=spec.option,
                   pair_rule=grid.pair_rule)
    for key, val in grid.budgets.items():
        setattr(cfg, key, val)
    return cfg.validate()


def _run_cell(args):
    problem_name, n, spec, grid = args
    problem = get_problem(problem_name, n, seed=grid.seed)
    try:
        report = solve(problem, _make_config(spec, grid))
        return RunRecord(
            problem=problem_name, n=n, solver=spec.type, m=spec.m,
            option=spec.option if spec.type == "mss" else "",
            status=report.status, iters=report.iters, fevals=report.fevals,
            gevals=report.gevals, final_gnorm=report.final_gnorm,
            final_f=report.final_f, wall_ms=report.wall_ms,
            fallback_steps=report.fallback_steps,
        )
    except Exception:  # per-run failures must not abort the grid
        return RunRecord(problem=problem_name, n=n, solver=spec.type, m=spec.m,
                         option=spec.option if spec.type == "mss" else "",
                         status="error", iters=0, fevals=0, gevals=0,
                         final_gnorm=math.nan, final_f=math.nan, wall_ms=0.0,
                         fallback_steps=0)


def run_grid(grid: GridConfig, jobs: int = 1, progress=None):
    """Execute every (problem, solver) cell and return the records in
    config order.  Deterministic given the config, apart from wall_ms."""
    cells = [(p, grid.n, spec, grid) for p in grid.problems for spec in grid.solvers]
    if jobs > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=jobs) as pool:
            records = list(pool.map(_run_cell, cells))
    else:
        records = []
        for cell in cells:
            rec = _run_cell(cell)
            if progress:
                progress(rec)
            records.append(rec)
    return records


def performance_profile(records, metric: str = "fevals"):
    """Dolan-More profiles: for each solver label the fraction of problems
    whose log2 performance ratio is below tau.

    Unsolved runs get an infinite ratio and are never counted.  All curves
    share one tau grid: 512 even samples on [0, r_M] plus the exact
    breakpoints, where r_M is the largest finite log2 ratio.
    """
    if metric not in ("fevals", "wall_ms"):
        raise ValueError("metric must be 'fevals' or 'wall_ms'")
    if not records:
        raise ValueError("no run records")
    problems = sorted({r.problem for r in records})
    labels = sorted({r.label for r in records})
    nprob = len(problems)
    log_ratios = {lab: [] for lab in labels}
    for prob in problems:
        rows = [r for r in records if r.problem == prob]
        solved = [r for r in rows if r.solved and getattr(r, metric) > 0]
        if not solved:
            continue
        best = min(getattr(r, metric) for r in solved)
        for r in solved:
            log_ratios[r.label].append(math.log2(getattr(r, metric) / best))
    finite = [v for vals in log_ratios.values() for v in vals]
    r_max = max(finite) if finite else 0.0
    if r_max <= 0.0:
        r_max = 1.0
    taus = np.unique(np.concatenate([
        np.linspace(0.0, r_max, PROFILE_SAMPLES),
        np.asarray(finite, dtype=np.float64),
    ]))
    taus = taus[taus <= r_max + 1e-12]
    curves = []
    for lab in labels:
        vals = np.sort(np.asarray(log_ratios[lab], dtype=np.float64))
        pis = np.searchsorted(vals, taus, side="right") / nprob
        curves.append(ProfileCurve(lab, list(zip(taus.tolist(), pis.tolist()))))
    return curves


def summarize(records) -> dict:
    """Per-solver solved counts, totals over commonly-solved problems, and
    pairwise percent improvement in function evaluations
    ``(other - ours) / other * 100`` over that common set."""
    labels = sorted({r.label for r in records})
    problems = sorted({r.problem for r in records})
    by_cell = {(r.problem, r.label): r for r in records}
    common = [p for p in problems
              if all((p, lab) in by_cell and by_cell[(p, lab)].solved for lab in labels)]
    totals = {lab: int(sum(by_cell[(p, lab)].fevals for p in common)) for lab in labels}
    improvement = {}
    for ours in labels:
        improvement[ours] = {}
        for other in labels:
            if other == ours or totals[other] <= 0:
                continue
            improvement[ours][other] = 100.0 * (totals[other] - totals[ours]) / totals[other]
    return {
        "metric": "fevals",
        "problems": len(problems),
        "commonly_solved": common,
        "solvers": {
            lab: {
                "solved": sum(1 for p in problems
                              if (p, lab) in by_cell and by_cell[(p, lab)].solved),
                "total_fevals_common": totals[lab],
            }
            for lab in labels
        },
        "improvement_percent": improvement,
    }


def write_runs_csv(records, path):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUNS_HEADER)
        for r in records:
            writer.writerow([r.problem, r.n, r.solver, r.m, r.option, r.status,
                             r.iters, r.fevals, r.gevals,
                             repr(r.final_gnorm), repr(r.final_f),
                             f"{r.wall_ms:.3f}", r.fallback_steps])


def read_runs_csv(path):
    records = []
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        missing = set(RUNS_HEADER) - set(reader.fieldnames or [])
        if missing:
            raise ValueError(f"{path}: missing columns {sorted(missing)}")
        for row in reader:
            records.append(RunRecord(
                problem=row["problem"], n=int(row["n"]), solver=row["solver"],
                m=int(row["m"]), option=row["option"], status=row["status"],
                iters=int(row["iters"]), fevals=int(row["fevals"]),
                gevals=int(row["gevals"]), final_gnorm=float(row["final_gnorm"]),
                final_f=float(row["final_f"]), wall_ms=float(row["wall_ms"]),
                fallback_steps=int(row["fallback_steps"]),
            ))
    return records


def write_profile_csv(curves, path):
    if not curves:
        raise ValueError("no profile curves")
    taus = [t for t, _ in curves[0].points]
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["tau"] + [c.solver_label for c in curves])
        for i, tau in enumerate(taus):
            writer.writerow([repr(tau)] + [repr(c.points[i][1]) for c in curves])


def emit(records, curves_by_metric: dict, out_dir) -> dict:
    """Write runs.csv, profile_<metric>.csv and summary.json; returns the
    paths keyed by artifact name."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {}
    runs_path = out / "runs.csv"
    write_runs_csv(records, runs_path)
    paths["runs"] = runs_path
    for metric, curves in curves_by_metric.items():
        ppath = out / f"profile_{metric}.csv"
        write_profile_csv(curves, ppath)
        paths[f"profile_{metric}"] = ppath
    spath = out / "summary.json"
    with open(spath, "w") as fh:
        json.dump(summarize(records), fh, indent=2)
        fh.write("\n")
    paths["summary"] = spath
    return paths
