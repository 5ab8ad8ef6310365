"""Compare the numba kernel path against the pure numpy fallback.

Times the three hot dense kernels (pivoted LDL^T, symmetric eigensolver,
upper-triangular solve) at solver-realistic sizes, plus one full driver run,
under both settings of MSSTRUST_NUMBA.  Run directly:

    python benchmarks/bench_kernels.py

The parent process spawns one child per path so each import binds its own
kernels.
"""

import json
import os
import subprocess
import sys
import time

SIZES = (6, 10, 14, 16)
REPEAT = 2000


def time_kernels():
    import numpy as np

    from msstrust._accel import NUMBA_ENABLED
    from msstrust.dense_kernels import gram, ldlt_pivoted, solve_upper_tri, sym_eig

    rng = np.random.default_rng(0)
    out = {"path": "numba" if NUMBA_ENABLED else "numpy"}

    for k in SIZES:
        A = gram(rng.standard_normal((3 * k, k)))
        R = np.triu(rng.standard_normal((k, k))) + 3.0 * np.eye(k)
        V = rng.standard_normal((k, k))
        ldlt_pivoted(A)  # trigger any jit compilation outside the timer
        sym_eig(A)
        solve_upper_tri(R, V)
        t0 = time.perf_counter()
        for _ in range(REPEAT):
            ldlt_pivoted(A)
        t1 = time.perf_counter()
        for _ in range(REPEAT):
            sym_eig(A)
        t2 = time.perf_counter()
        for _ in range(REPEAT):
            solve_upper_tri(R, V)
        t3 = time.perf_counter()
        out[f"ldlt_k{k}_us"] = (t1 - t0) / REPEAT * 1e6
        out[f"eig_k{k}_us"] = (t2 - t1) / REPEAT * 1e6
        out[f"tri_k{k}_us"] = (t3 - t2) / REPEAT * 1e6

    from msstrust import TrConfig, get_problem, mss_solve

    problem = get_problem("ext_rosenbrock", 1000)
    t0 = time.perf_counter()
    report = mss_solve(problem, TrConfig(solver="mss", m=5, option="half-sum-bb"))
    out["rosenbrock_n1000_ms"] = (time.perf_counter() - t0) * 1e3
    out["rosenbrock_iters"] = report.iters
    return out


def main():
    if os.environ.get("_BENCH_CHILD"):
        print(json.dumps(time_kernels()))
        return
    results = []
    for flag in ("1", "0"):
        env = dict(os.environ, MSSTRUST_NUMBA=flag, _BENCH_CHILD="1")
        proc = subprocess.run([sys.executable, os.path.abspath(__file__)],
                              env=env, capture_output=True, text=True, check=True)
        results.append(json.loads(proc.stdout.strip().splitlines()[-1]))
    numba, numpy_ = results
    print(f"{'kernel':>22s} {'numba':>12s} {'numpy':>12s} {'speedup':>9s}")
    for key in numba:
        if key in ("path", "rosenbrock_iters"):
            continue
        a, b = numba[key], numpy_[key]
        unit = "us" if key.endswith("_us") else "ms"
        name = key.rsplit("_", 1)[0]
        print(f"{name:>22s} {a:>10.2f}{unit} {b:>10.2f}{unit} {b / a:>8.2f}x")
    print(f"(driver iterations: numba={numba['rosenbrock_iters']}, "
          f"numpy={numpy_['rosenbrock_iters']})")


if __name__ == "__main__":
    main()
