import json

import numpy as np
import pytest

from msstrust import bench
from msstrust.bench import (
    GridConfig,
    ProfileCurve,
    RunRecord,
    SolverSpec,
    emit,
    parse_config,
    performance_profile,
    read_runs_csv,
    run_grid,
    summarize,
    write_profile_csv,
)
from msstrust.cli import main as cli_main


def tiny_grid():
    return GridConfig(
        problems=["ext_rosenbrock", "gen_quad_spectrum"],
        n=40,
        solvers=[SolverSpec("mss", m=3, option="half-sum-bb"),
                 SolverSpec("lsr1-bb", m=3)],
    )


def record(problem, label_solver, fevals, status="converged", m=3, option=""):
    return RunRecord(problem=problem, n=40, solver=label_solver, m=m,
                     option=option, status=status, iters=fevals - 1,
                     fevals=fevals, gevals=fevals, final_gnorm=1e-6,
                     final_f=0.0, wall_ms=1.0, fallback_steps=0)


class TestRunGrid:
    def test_cell_count(self):
        records = run_grid(tiny_grid())
        assert len(records) == 4
        assert all(r.fevals >= 1 for r in records)

    def test_deterministic_replay(self):
        r1 = run_grid(tiny_grid())
        r2 = run_grid(tiny_grid())
        for a, b in zip(r1, r2):
            assert (a.problem, a.label, a.status, a.iters, a.fevals,
                    a.final_gnorm, a.final_f) == \
                   (b.problem, b.label, b.status, b.iters, b.fevals,
                    b.final_gnorm, b.final_f)

    def test_unknown_problem_rejected_before_running(self):
        raw = {"problems": ["nope"], "solvers": [{"type": "mss"}]}
        with pytest.raises(ValueError, match="nope"):
            parse_config(raw)

    def test_unknown_solver_rejected(self):
        raw = {"problems": ["ext_rosenbrock"], "solvers": [{"type": "bfgs"}]}
        with pytest.raises(ValueError, match="bfgs"):
            parse_config(raw)

    def test_unknown_option_rejected(self):
        raw = {"problems": ["ext_rosenbrock"],
               "solvers": [{"type": "mss", "option": "zeta9"}]}
        with pytest.raises(ValueError, match="zeta9"):
            parse_config(raw)

    def test_all_expands_suite(self):
        cfg = parse_config({"problems": "all", "solvers": [{"type": "mss"}]})
        assert len(cfg.problems) >= 20

    def test_parallel_matches_serial(self):
        serial = run_grid(tiny_grid(), jobs=1)
        parallel = run_grid(tiny_grid(), jobs=2)
        for a, b in zip(serial, parallel):
            assert (a.problem, a.label, a.fevals) == (b.problem, b.label, b.fevals)

    def test_solver_crash_recorded_without_aborting(self, monkeypatch):
        calls = {"n": 0}
        real_solve = bench.solve

        def flaky(problem, config):
            calls["n"] += 1
            if problem.name == "ext_rosenbrock" and config.solver == "mss":
                raise RuntimeError("boom")
            return real_solve(problem, config)

        monkeypatch.setattr(bench, "solve", flaky)
        records = run_grid(tiny_grid())
        assert len(records) == 4
        crashed = [r for r in records if r.status == "error"]
        assert len(crashed) == 1
        assert crashed[0].problem == "ext_rosenbrock"
        assert all(r.iters > 0 for r in records if r.status != "error")

    def test_budget_overrides_apply(self):
        grid = tiny_grid()
        grid.budgets = {"max_iters": 1}
        records = run_grid(grid)
        assert all(r.status == "iter-limit" and r.iters == 1 for r in records)

    def test_unknown_budget_key_rejected(self):
        raw = {"problems": ["ext_rosenbrock"], "solvers": [{"type": "mss"}],
               "budgets": {"max_steps": 3}}
        with pytest.raises(ValueError, match="max_steps"):
            parse_config(raw)


class TestPerformanceProfile:
    def hand_records(self):
        return [record("p1", "A", 10), record("p2", "A", 20),
                record("p1", "B", 20), record("p2", "B", 20)]

    def curve(self, curves, label):
        return next(c for c in curves if c.solver_label == label)

    def pi_at(self, curve, tau):
        vals = [pi for t, pi in curve.points if t <= tau + 1e-12]
        return vals[-1]

    def test_hand_example(self):
        curves = performance_profile(self.hand_records())
        a = self.curve(curves, "A(m=3)")
        b = self.curve(curves, "B(m=3)")
        assert self.pi_at(a, 0.0) == 1.0
        assert self.pi_at(b, 0.0) == 0.5
        assert self.pi_at(b, 1.0) == 1.0

    def test_single_solver_constant(self):
        curves = performance_profile([record("p1", "A", 10),
                                      record("p2", "A", 20, status="iter-limit")])
        (a,) = curves
        pis = [pi for _, pi in a.points]
        assert pis[0] == 0.5
        assert all(pi == 0.5 for pi in pis)

    def test_all_failing_solver_is_zero(self):
        recs = self.hand_records() + [
            record("p1", "C", 5, status="iter-limit"),
            record("p2", "C", 5, status="delta-collapse"),
        ]
        curves = performance_profile(recs)
        c = self.curve(curves, "C(m=3)")
        assert all(pi == 0.0 for _, pi in c.points)

    def test_shuffle_invariance(self, rng):
        recs = self.hand_records()
        base = performance_profile(recs)
        perm = [recs[i] for i in rng.permutation(len(recs))]
        shuffled = performance_profile(perm)
        for c1, c2 in zip(base, shuffled):
            assert c1.solver_label == c2.solver_label
            assert c1.points == c2.points

    def test_curves_monotone_in_tau(self):
        records = run_grid(tiny_grid())
        for curve in performance_profile(records):
            pis = [pi for _, pi in curve.points]
            assert all(b >= a for a, b in zip(pis, pis[1:]))
            assert all(0.0 <= pi <= 1.0 for pi in pis)

    def test_restriction_to_common_set_keeps_ratios(self):
        recs = self.hand_records() + [
            record("p3", "A", 7), record("p3", "B", 7, status="iter-limit")]
        full = {}
        import math
        for prob in ("p1", "p2"):
            solved = [r for r in recs if r.problem == prob and r.solved]
            best = min(r.fevals for r in solved)
            for r in solved:
                full[(prob, r.label)] = math.log2(r.fevals / best)
        common_only = [r for r in recs if r.problem in ("p1", "p2")]
        again = {}
        for prob in ("p1", "p2"):
            solved = [r for r in common_only if r.problem == prob and r.solved]
            best = min(r.fevals for r in solved)
            for r in solved:
                again[(prob, r.label)] = math.log2(r.fevals / best)
        assert full == again

    def test_empty_records_rejected(self):
        with pytest.raises(ValueError):
            performance_profile([])

    def test_bad_metric_rejected(self):
        with pytest.raises(ValueError):
            performance_profile(self.hand_records(), metric="iters")


class TestSummarize:
    def test_improvement_arithmetic(self):
        # totals 8753 vs 20152 over the common set -> 56.57% improvement
        recs = [record("p1", "ours", 8753), record("p1", "base", 20152)]
        summary = summarize(recs)
        got = summary["improvement_percent"]["ours(m=3)"]["base(m=3)"]
        assert round(got, 2) == 56.57

    def test_common_set_excludes_unsolved(self):
        recs = [record("p1", "A", 10), record("p2", "A", 10),
                record("p1", "B", 10), record("p2", "B", 10, status="iter-limit")]
        summary = summarize(recs)
        assert summary["commonly_solved"] == ["p1"]
        assert summary["solvers"]["A(m=3)"]["solved"] == 2
        assert summary["solvers"]["B(m=3)"]["solved"] == 1
        assert summary["solvers"]["A(m=3)"]["total_fevals_common"] == 10


class TestEmit:
    def test_files_and_headers(self, tmp_path):
        records = run_grid(tiny_grid())
        curves = {"fevals": performance_profile(records, "fevals")}
        paths = emit(records, curves, tmp_path / "out")
        runs = (tmp_path / "out" / "runs.csv").read_text().strip().splitlines()
        assert len(runs) == 1 + 4
        assert runs[0] == ("problem,n,solver,m,option,status,iters,fevals,"
                           "gevals,final_gnorm,final_f,wall_ms,fallback_steps")
        prof = (tmp_path / "out" / "profile_fevals.csv").read_text().splitlines()
        assert prof[0].startswith("tau,")
        summary = json.loads((tmp_path / "out" / "summary.json").read_text())
        assert "improvement_percent" in summary
        assert set(paths) == {"runs", "profile_fevals", "summary"}

    def test_profile_columns_monotone_down_the_file(self, tmp_path):
        records = run_grid(tiny_grid())
        path = tmp_path / "prof.csv"
        write_profile_csv(performance_profile(records), path)
        rows = [line.split(",") for line in path.read_text().splitlines()[1:]]
        for col in range(1, len(rows[0])):
            vals = [float(r[col]) for r in rows]
            assert all(b >= a - 1e-15 for a, b in zip(vals, vals[1:]))

    def test_runs_csv_roundtrip(self, tmp_path):
        records = run_grid(tiny_grid())
        path = tmp_path / "runs.csv"
        bench.write_runs_csv(records, path)
        back = read_runs_csv(path)
        for a, b in zip(records, back):
            assert (a.problem, a.solver, a.m, a.option, a.status, a.iters,
                    a.fevals, a.gevals, a.fallback_steps) == \
                   (b.problem, b.solver, b.m, b.option, b.status, b.iters,
                    b.fevals, b.gevals, b.fallback_steps)
            assert a.final_gnorm == pytest.approx(b.final_gnorm, nan_ok=True)

    def test_read_rejects_missing_columns(self, tmp_path):
        path = tmp_path / "bad.csv"
        path.write_text("problem,n\nfoo,4\n")
        with pytest.raises(ValueError, match="missing columns"):
            read_runs_csv(path)


class TestCli:
    def write_config(self, tmp_path):
        cfg = {
            "problems": ["ext_rosenbrock", "gen_quad_spectrum"],
            "n": 40,
            "solvers": [{"type": "mss", "m": 3, "option": "half-sum-bb"},
                        {"type": "lsr1-id", "m": 3}],
        }
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(cfg))
        return path

    def test_run_and_profile(self, tmp_path, capsys):
        cfg = self.write_config(tmp_path)
        out = tmp_path / "out"
        assert cli_main(["run", "--config", str(cfg), "--out", str(out)]) == 0
        assert (out / "runs.csv").exists()
        assert (out / "summary.json").exists()
        assert cli_main(["profile", "--runs", str(out / "runs.csv"),
                         "--metric", "fevals",
                         "--out", str(tmp_path / "p.csv")]) == 0
        assert (tmp_path / "p.csv").exists()

    def test_run_validation_error_exit_code(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"problems": ["nope"],
                                   "solvers": [{"type": "mss"}]}))
        assert cli_main(["run", "--config", str(bad),
                         "--out", str(tmp_path / "o")]) == 2

    def test_profile_missing_file_exit_code(self, tmp_path):
        assert cli_main(["profile", "--runs", str(tmp_path / "none.csv"),
                         "--out", str(tmp_path / "p.csv")]) == 2

    def test_check_passes(self, capsys):
        assert cli_main(["check", "--n", "20"]) == 0
        out = capsys.readouterr().out
        assert "all checks passed" in out
