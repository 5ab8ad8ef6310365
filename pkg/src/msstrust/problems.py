"""Scalable unconstrained test problems with analytic gradients.

Twenty classically-formulated problems (extended Rosenbrock, extended
Powell singular, Freudenstein-Roth, Dixon-Price, trigonometric, Broyden
tridiagonal, discrete boundary value, penalty-I, ...) addressable by name,
plus a central-difference gradient verifier.  Dimensions are configurable
(default 1000) and must be divisible by 4 so block-structured problems tile
evenly.  Starting points follow the literature where one exists; the
invented members use fixed deterministic starts.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np


@dataclass(frozen=True)
class ProblemDef:
    """A named objective with analytic gradient and a standard start."""

    name: str
    n: int
    x0: np.ndarray
    eval_f: Callable[[np.ndarray], float]
    eval_g: Callable[[np.ndarray], np.ndarray]


def _tile(pattern, n):
    return np.tile(np.asarray(pattern, dtype=np.float64), n // len(pattern))


def _ext_rosenbrock(n, rng):
    def f(x):
        u, v = x[0::2], x[1::2]
        return float(np.sum(100.0 * (v - u ** 2) ** 2 + (1.0 - u) ** 2))

    def g(x):
        u, v = x[0::2], x[1::2]
        out = np.empty_like(x)
        t = v - u ** 2
        out[0::2] = -400.0 * u * t - 2.0 * (1.0 - u)
        out[1::2] = 200.0 * t
        return out

    return _tile([-1.2, 1.0], n), f, g


def _scaled_rosenbrock(n, rng):
    pairs = n // 2
    c = 100.0 * (1.0 + np.arange(pairs) / max(pairs - 1, 1))

    def f(x):
        u, v = x[0::2], x[1::2]
        return float(np.sum(c * (v - u ** 2) ** 2 + (1.0 - u) ** 2))

    def g(x):
        u, v = x[0::2], x[1::2]
        out = np.empty_like(x)
        t = v - u ** 2
        out[0::2] = -4.0 * c * u * t - 2.0 * (1.0 - u)
        out[1::2] = 2.0 * c * t
        return out

    return _tile([-1.2, 1.0], n), f, g


def _ext_powell(n, rng):
    def f(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        return float(np.sum((a + 10.0 * b) ** 2 + 5.0 * (c - d) ** 2
                            + (b - 2.0 * c) ** 4 + 10.0 * (a - d) ** 4))

    def g(x):
        a, b, c, d = x[0::4], x[1::4], x[2::4], x[3::4]
        t1 = a + 10.0 * b
        t2 = c - d
        t3 = (b - 2.0 * c) ** 3
        t4 = (a - d) ** 3
        out = np.empty_like(x)
        out[0::4] = 2.0 * t1 + 40.0 * t4
        out[1::4] = 20.0 * t1 + 4.0 * t3
        out[2::4] = 10.0 * t2 - 8.0 * t3
        out[3::4] = -10.0 * t2 - 40.0 * t4
        return out

    return _tile([3.0, -1.0, 0.0, 1.0], n), f, g


def _ext_freudenstein_roth(n, rng):
    def parts(x):
        u, v = x[0::2], x[1::2]
        r1 = -13.0 + u + ((5.0 - v) * v - 2.0) * v
        r2 = -29.0 + u + ((v + 1.0) * v - 14.0) * v
        return u, v, r1, r2

    def f(x):
        _, _, r1, r2 = parts(x)
        return float(np.sum(r1 ** 2 + r2 ** 2))

    def g(x):
        _, v, r1, r2 = parts(x)
        out = np.empty_like(x)
        out[0::2] = 2.0 * (r1 + r2)
        out[1::2] = 2.0 * (r1 * (10.0 * v - 3.0 * v ** 2 - 2.0)
                           + r2 * (3.0 * v ** 2 + 2.0 * v - 14.0))
        return out

    return _tile([0.5, -2.0], n), f, g


def _dixon_price(n, rng):
    w = np.arange(2, n + 1, dtype=np.float64)  # weights for terms i = 2..n

    def f(x):
        t = 2.0 * x[1:] ** 2 - x[:-1]
        return float((x[0] - 1.0) ** 2 + np.sum(w * t ** 2))

    def g(x):
        t = 2.0 * x[1:] ** 2 - x[:-1]
        out = np.zeros_like(x)
        out[0] = 2.0 * (x[0] - 1.0)
        out[1:] += 8.0 * w * t * x[1:]
        out[:-1] -= 2.0 * w * t
        return out

    return -np.ones(n), f, g


def _dqrtic(n, rng):
    c = np.arange(1, n + 1, dtype=np.float64)

    def f(x):
        return float(np.sum((x - c) ** 4))

    def g(x):
        return 4.0 * (x - c) ** 3

    return 2.0 * np.ones(n), f, g


def _trigonometric(n, rng):
    idx = np.arange(1, n + 1, dtype=np.float64)

    def residuals(x):
        cs = np.cos(x)
        return n - np.sum(cs) + idx * (1.0 - cs) - np.sin(x)

    def f(x):
        return float(np.sum(residuals(x) ** 2))

    def g(x):
        r = residuals(x)
        sn = np.sin(x)
        return 2.0 * (sn * np.sum(r) + r * (idx * sn - np.cos(x)))

    return np.full(n, 1.0 / n), f, g


def _broyden_tridiagonal(n, rng):
    def residuals(x):
        r = (3.0 - 2.0 * x) * x + 1.0
        r[1:] -= x[:-1]
        r[:-1] -= 2.0 * x[1:]
        return r

    def f(x):
        return float(np.sum(residuals(x) ** 2))

    def g(x):
        r = residuals(x)
        out = 2.0 * r * (3.0 - 4.0 * x)
        out[:-1] -= 2.0 * r[1:]
        out[1:] -= 4.0 * r[:-1]
        return out

    return -np.ones(n), f, g


def _discrete_boundary_value(n, rng):
    h = 1.0 / (n + 1)
    t = np.arange(1, n + 1, dtype=np.float64) * h

    def residuals(x):
        cube = (x + t + 1.0) ** 3
        r = 2.0 * x + 0.5 * h * h * cube
        r[1:] -= x[:-1]
        r[:-1] -= x[1:]
        return r

    def f(x):
        return float(np.sum(residuals(x) ** 2))

    def g(x):
        r = residuals(x)
        diag = 2.0 + 1.5 * h * h * (x + t + 1.0) ** 2
        out = 2.0 * r * diag
        out[:-1] -= 2.0 * r[1:]
        out[1:] -= 2.0 * r[:-1]
        return out

    return t * (t - 1.0), f, g


def _penalty1(n, rng):
    a = 1e-5

    def f(x):
        return float(a * np.sum((x - 1.0) ** 2) + (np.sum(x ** 2) - 0.25) ** 2)

    def g(x):
        return 2.0 * a * (x - 1.0) + 4.0 * (np.sum(x ** 2) - 0.25) * x

    return np.arange(1, n + 1, dtype=np.float64), f, g


def _householder_chain(n, rng, count=2):
    vs = []
    for _ in range(count):
        v = rng.standard_normal(n)
        vs.append(v / np.linalg.norm(v))
    return vs


def _apply_q(vs, x):
    y = x.copy()
    for v in vs:
        y -= 2.0 * v * (v @ y)
    return y


def _apply_qt(vs, x):
    y = x.copy()
    for v in reversed(vs):
        y -= 2.0 * v * (v @ y)
    return y


def _gen_quad_spectrum(n, rng):
    lam = np.linspace(1.0, 100.0, n)
    vs = _householder_chain(n, rng)

    def f(x):
        y = _apply_q(vs, x)
        return float(0.5 * np.sum(lam * y ** 2))

    def g(x):
        y = _apply_q(vs, x)
        return _apply_qt(vs, lam * y)

    return np.ones(n), f, g


def _chained_wood(n, rng):
    j = np.arange(0, n - 2, 2)  # block starts, each over (j, j+1, j+2, j+3)

    def pieces(x):
        a, b, c, d = x[j], x[j + 1], x[j + 2], x[j + 3]
        return a, b, c, d

    def f(x):
        a, b, c, d = pieces(x)
        return float(np.sum(
            100.0 * (b - a ** 2) ** 2 + (1.0 - a) ** 2
            + 90.0 * (d - c ** 2) ** 2 + (1.0 - c) ** 2
            + 10.0 * (b + d - 2.0) ** 2 + 0.1 * (b - d) ** 2
        ))

    def g(x):
        a, b, c, d = pieces(x)
        t1 = b - a ** 2
        t2 = d - c ** 2
        t3 = b + d - 2.0
        t4 = b - d
        out = np.zeros_like(x)
        np.add.at(out, j, -400.0 * a * t1 - 2.0 * (1.0 - a))
        np.add.at(out, j + 1, 200.0 * t1 + 20.0 * t3 + 0.2 * t4)
        np.add.at(out, j + 2, -360.0 * c * t2 - 2.0 * (1.0 - c))
        np.add.at(out, j + 3, 180.0 * t2 + 20.0 * t3 - 0.2 * t4)
        return out

    return _tile([-3.0, -1.0], n), f, g


def _ext_beale(n, rng):
    def parts(x):
        u, v = x[0::2], x[1::2]
        r1 = 1.5 - u * (1.0 - v)
        r2 = 2.25 - u * (1.0 - v ** 2)
        r3 = 2.625 - u * (1.0 - v ** 3)
        return u, v, r1, r2, r3

    def f(x):
        _, _, r1, r2, r3 = parts(x)
        return float(np.sum(r1 ** 2 + r2 ** 2 + r3 ** 2))

    def g(x):
        u, v, r1, r2, r3 = parts(x)
        out = np.empty_like(x)
        out[0::2] = -2.0 * (r1 * (1.0 - v) + r2 * (1.0 - v ** 2) + r3 * (1.0 - v ** 3))
        out[1::2] = 2.0 * u * (r1 + 2.0 * v * r2 + 3.0 * v ** 2 * r3)
        return out

    return np.ones(n), f, g


def _arwhead(n, rng):
    def f(x):
        head = x[:-1]
        z2 = x[-1] ** 2
        return float(np.sum((head ** 2 + z2) ** 2 - 4.0 * head + 3.0))

    def g(x):
        head = x[:-1]
        z = x[-1]
        t = head ** 2 + z ** 2
        out = np.empty_like(x)
        out[:-1] = 4.0 * head * t - 4.0
        out[-1] = 4.0 * z * np.sum(t)
        return out

    return np.ones(n), f, g


def _nondia(n, rng):
    def f(x):
        t = x[0] - x[:-1] ** 2
        return float((x[0] - 1.0) ** 2 + 100.0 * np.sum(t ** 2))

    def g(x):
        t = x[0] - x[:-1] ** 2
        out = np.zeros_like(x)
        out[0] = 2.0 * (x[0] - 1.0) + 200.0 * np.sum(t)
        out[:-1] -= 400.0 * x[:-1] * t
        return out

    return -np.ones(n), f, g


def _engval1(n, rng):
    def f(x):
        t = x[:-1] ** 2 + x[1:] ** 2
        return float(np.sum(t ** 2 - 4.0 * x[:-1] + 3.0))

    def g(x):
        t = x[:-1] ** 2 + x[1:] ** 2
        out = np.zeros_like(x)
        out[:-1] += 4.0 * x[:-1] * t - 4.0
        out[1:] += 4.0 * x[1:] * t
        return out

    return 2.0 * np.ones(n), f, g


def _diag_double_well(n, rng):
    def f(x):
        return float(np.sum((x ** 2 - 1.0) ** 2))

    def g(x):
        return 4.0 * x * (x ** 2 - 1.0)

    return _tile([2.0, 0.5], n), f, g


def _ill_conditioned_quad(n, rng):
    # spectrum log-spaced on [1e-3, 1e3]: condition number 1e6, centered scale
    kappa = 10.0 ** (-3.0 + 6.0 * np.arange(n) / (n - 1))

    def f(x):
        return float(0.5 * np.sum(kappa * x ** 2))

    def g(x):
        return kappa * x

    return np.ones(n), f, g


def _perturbed_quad(n, rng):
    c = np.arange(1, n + 1, dtype=np.float64)

    def f(x):
        return float(np.sum(c * x ** 2) + np.sum(x) ** 2 / 100.0)

    def g(x):
        return 2.0 * c * x + (2.0 / 100.0) * np.sum(x)

    return 0.5 * np.ones(n), f, g


def _sum_quartics(n, rng):
    def f(x):
        return float(np.sum((x - 1.0) ** 4))

    def g(x):
        return 4.0 * (x - 1.0) ** 3

    return np.zeros(n), f, g


BUILDERS = {
    "ext_rosenbrock": _ext_rosenbrock,
    "ext_powell": _ext_powell,
    "ext_freudenstein_roth": _ext_freudenstein_roth,
    "dixon_price": _dixon_price,
    "dqrtic": _dqrtic,
    "trigonometric": _trigonometric,
    "broyden_tridiagonal": _broyden_tridiagonal,
    "discrete_boundary_value": _discrete_boundary_value,
    "penalty1": _penalty1,
    "gen_quad_spectrum": _gen_quad_spectrum,
    "chained_wood": _chained_wood,
    "ext_beale": _ext_beale,
    "arwhead": _arwhead,
    "nondia": _nondia,
    "engval1": _engval1,
    "diag_double_well": _diag_double_well,
    "ill_conditioned_quad": _ill_conditioned_quad,
    "scaled_rosenbrock": _scaled_rosenbrock,
    "perturbed_quad": _perturbed_quad,
    "sum_quartics": _sum_quartics,
}


def problem_names():
    return list(BUILDERS)


def get_problem(name: str, n: int, seed: int = 0) -> ProblemDef:
    """Instantiate one suite problem at dimension ``n`` (divisible by 4)."""
    if name not in BUILDERS:
        raise KeyError(f"unknown problem {name!r}; known: {sorted(BUILDERS)}")
    if n < 4 or n % 4 != 0:
        raise ValueError("n must be >= 4 and divisible by 4")
    rng = np.random.default_rng(seed)
    x0, f, g = BUILDERS[name](n, rng)
    return ProblemDef(name=name, n=n, x0=np.asarray(x0, dtype=np.float64),
                      eval_f=f, eval_g=g)


def suite(default_n: int = 1000, seed: int = 0):
    """The full problem suite at a common dimension."""
    return [get_problem(name, default_n, seed) for name in BUILDERS]


def fd_gradient_check(p: ProblemDef, x: np.ndarray, h: float | None = None) -> float:
    """Maximum relative gradient-component error against central differences.

    Uses ``h = 1e-6 * (1 + ||x||_inf)`` by default and the denominator
    ``max(1, |g_i|)``.  Intended for reduced dimensions (n <= 50).
    """
    x = np.asarray(x, dtype=np.float64)
    if h is None:
        h = 1e-6 * (1.0 + float(np.abs(x).max()))
    if not h > 0:
        raise ValueError("h must be positive")
    g = p.eval_g(x)
    worst = 0.0
    for i in range(x.size):
        e = np.zeros_like(x)
        e[i] = h
        fd = (p.eval_f(x + e) - p.eval_f(x - e)) / (2.0 * h)
        err = abs(g[i] - fd) / max(1.0, abs(g[i]))
        worst = max(worst, err)
    return worst
