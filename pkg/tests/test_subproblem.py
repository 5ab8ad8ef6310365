import numpy as np
import pytest
import scipy.optimize
from conftest import dense_from_view

from msstrust.mss_core import SpectralView, apply_B, empty_view
from msstrust.tr_subproblem import (
    cauchy_fallback,
    secular_newton,
    solve_obs,
    solve_steihaug_cg,
)


def random_view(rng, n, r, lam_lo=-3.0, lam_hi=4.0, zeta=1.0, zetaC=None):
    Q, _ = np.linalg.qr(rng.standard_normal((n, r)))
    lam_hat = np.sort(rng.uniform(lam_lo, lam_hi, r)) - zeta
    if zetaC is None:
        zetaC = float(rng.uniform(0.2, 3.0))
    view = SpectralView(Q, lam_hat, zeta, zetaC, n)
    return view


def oracle_model_value(B, g, Delta):
    """Dense reference minimizer: full eigendecomposition + 1-D sigma search.

    Returns the best *feasible* model value among the interior candidate,
    the root-found boundary step (projected into the ball: near the pole the
    secular equation is too steep for brentq's interval tolerance to pin the
    step coefficient), and the eigenvector-augmented boundary step.
    """
    d, V = np.linalg.eigh(B)
    b = V.T @ g
    dmin = d.min()

    def q(p):
        return float(g @ p + 0.5 * p @ B @ p)

    def wnorm(sig):
        return float(np.linalg.norm(b / (d + sig)))

    if dmin > 0 and wnorm(0.0) <= Delta:
        return q(V @ (-b / d))
    lo = max(0.0, -dmin)
    candidates = []

    # eigenvector-augmented (or clipped pseudo-inverse) step at the pole
    mask_min = d <= dmin + 1e-10 * max(1.0, abs(dmin))
    den = d + lo
    w = np.zeros_like(b)
    w[~mask_min] = -b[~mask_min] / den[~mask_min]
    p_hat = V @ w
    pn = np.linalg.norm(p_hat)
    if pn <= Delta:
        alpha = np.sqrt(max(Delta ** 2 - pn ** 2, 0.0))
        z = V[:, int(np.argmin(d))]
        candidates.append(q(p_hat + alpha * z))
        candidates.append(q(p_hat - alpha * z))
    else:
        candidates.append(q(p_hat * (Delta / pn)))

    # boundary root candidate whenever a sign change brackets one
    f = lambda sig: wnorm(sig) - Delta
    eps_lo = np.finfo(float).tiny if lo == 0.0 else np.spacing(lo)
    if f(lo + eps_lo) > 0:
        hi = lo + max(1.0, np.linalg.norm(g) / Delta)
        while f(hi) > 0:
            hi = lo + 2 * (hi - lo)
        sigma = scipy.optimize.brentq(f, lo + eps_lo, hi, xtol=1e-15,
                                      rtol=8.9e-16, maxiter=200)
        w = -b / (d + sigma)
        nw = np.linalg.norm(w)
        if nw > Delta:
            w *= Delta / nw
        candidates.append(q(V @ w))
    return min(candidates)


def cauchy_value(B, g, Delta):
    gBg = float(g @ B @ g)
    gn = np.linalg.norm(g)
    tau = Delta / gn if gBg <= 0 else min(gn ** 2 / gBg, Delta / gn)
    p = -tau * g
    return float(g @ p + 0.5 * p @ B @ p)


def check_invariants(view, g, Delta, sol):
    B = dense_from_view(view)
    gnorm = np.linalg.norm(g)
    pnorm = np.linalg.norm(sol.p)
    assert pnorm <= Delta * (1 + 1e-8)
    kkt = np.linalg.norm(B @ sol.p + sol.sigma * sol.p + g)
    assert kkt <= 1e-7 * max(1.0, gnorm)
    assert abs(sol.sigma * (Delta - pnorm)) <= 1e-6 * Delta * max(1.0, sol.sigma)
    lam_min = np.linalg.eigvalsh(B).min()
    assert lam_min + sol.sigma >= -1e-8 * max(1.0, np.linalg.norm(B, 2))
    assert sol.sigma >= 0
    return B


class TestSolveObsExamples:
    def test_interior_identity_model(self):
        view = empty_view(3, 1.0, 1.0)
        g = np.array([1.0, 0.0, 0.0])
        sol = solve_obs(view, g, 10.0)
        assert not sol.on_boundary
        assert sol.sigma == 0.0
        assert np.allclose(sol.p, -g)
        assert np.allclose(sol.Bp, -g)

    def test_boundary_identity_model(self):
        view = empty_view(3, 1.0, 1.0)
        g = np.array([3.0, 0.0, 0.0])
        sol = solve_obs(view, g, 1.0)
        assert sol.on_boundary
        assert sol.sigma == pytest.approx(2.0, rel=1e-9)
        assert np.allclose(sol.p, -g / 3.0, atol=1e-9)
        assert np.linalg.norm(sol.p) == pytest.approx(1.0, rel=1e-9)

    def test_pure_eigenstep_hard_case(self, rng):
        view = random_view(rng, 6, 2, zeta=1.0, zetaC=1.0)
        view.lambda_hat = np.array([-3.0, 0.5])  # eigenvalues {-2, 1.5} + far 1
        g = np.zeros(6)
        sol = solve_obs(view, g, 1.0)
        assert sol.hard_case
        assert sol.sigma == pytest.approx(2.0)
        assert np.linalg.norm(sol.p) == pytest.approx(1.0, rel=1e-10)
        check_invariants(view, g, 1.0, sol)

    def test_zero_gradient_pd_model_stays_inside(self):
        view = empty_view(4, 1.0, 2.0)
        sol = solve_obs(view, np.zeros(4), 1.0)
        assert np.linalg.norm(sol.p) == 0.0
        assert sol.sigma == 0.0

    def test_rejects_bad_input(self):
        view = empty_view(3, 1.0, 1.0)
        with pytest.raises(ValueError):
            solve_obs(view, np.array([np.nan, 0.0, 0.0]), 1.0)
        with pytest.raises(ValueError):
            solve_obs(view, np.zeros(3), 0.0)


class TestSolveObsRandom:
    def test_invariants_and_oracle(self, rng):
        for trial in range(60):
            n = int(rng.integers(5, 26))
            r = int(rng.integers(1, min(7, n)))
            indefinite = trial % 2 == 0
            view = random_view(rng, n, r,
                               lam_lo=-3.0 if indefinite else 0.3,
                               zetaC=float(rng.uniform(-1.0, 3.0)) if indefinite
                               else float(rng.uniform(0.2, 3.0)))
            g = rng.standard_normal(n)
            Delta = float(rng.uniform(0.1, 3.0))
            sol = solve_obs(view, g, Delta)
            B = check_invariants(view, g, Delta, sol)
            q = float(g @ sol.p + 0.5 * sol.p @ B @ sol.p)
            q_ref = oracle_model_value(B, g, Delta)
            assert q <= q_ref + 1e-6
            assert abs(q - q_ref) <= 1e-6 * max(1.0, abs(q_ref))

    def test_spanned_hard_case(self, rng):
        for _ in range(10):
            n, r = 12, 3
            view = random_view(rng, n, r, zeta=1.0, zetaC=0.5)
            view.lambda_hat = np.array([-2.5, 0.3, 1.1]) - view.zeta  # min eig -2.5
            g = rng.standard_normal(n)
            a = view.Pfac.T @ g
            g = g - view.Pfac[:, 0] * a[0]  # zero mass on the minimal eigenvector
            Delta = 50.0  # large enough that the pseudo-step is interior
            sol = solve_obs(view, g, Delta)
            assert sol.hard_case
            assert sol.sigma == pytest.approx(2.5, rel=1e-12)
            check_invariants(view, g, Delta, sol)

    def test_far_space_hard_case(self, rng):
        n, r = 10, 2
        view = random_view(rng, n, r, zeta=1.0, zetaC=-0.5)
        view.lambda_hat = np.array([0.2, 1.0])
        g = view.Pfac @ np.array([0.7, -0.3])  # no complement component
        Delta = 30.0
        sol = solve_obs(view, g, Delta)
        assert sol.hard_case
        assert sol.sigma == pytest.approx(0.5, rel=1e-12)
        B = check_invariants(view, g, Delta, sol)
        q = float(g @ sol.p + 0.5 * sol.p @ B @ sol.p)
        q_ref = oracle_model_value(B, g, Delta)
        assert abs(q - q_ref) <= 1e-6 * max(1.0, abs(q_ref))

    def test_model_beats_cauchy(self, rng):
        for _ in range(40):
            n = int(rng.integers(4, 20))
            r = int(rng.integers(1, min(6, n)))
            view = random_view(rng, n, r, zetaC=float(rng.uniform(-1.0, 2.0)))
            g = rng.standard_normal(n)
            Delta = float(rng.uniform(0.2, 2.0))
            sol = solve_obs(view, g, Delta)
            B = dense_from_view(view)
            q = float(g @ sol.p + 0.5 * sol.p @ B @ sol.p)
            assert q <= cauchy_value(B, g, Delta) + 1e-9

    def test_near_hard_and_extreme_scales(self, rng):
        # nearly-hard instances (minimal-eigenvector gradient mass between
        # 1e-14 and 1e-9) and gradients scaled across 16 orders of magnitude
        # push the boundary multiplier within float resolution of the pole
        for trial in range(300):
            n = int(rng.integers(4, 26))
            r = int(rng.integers(1, min(7, n)))
            view = random_view(rng, n, r, lam_lo=float(rng.uniform(-4.0, 0.2)),
                               zetaC=float(rng.uniform(-2.0, 2.5)))
            g = rng.standard_normal(n)
            if trial % 3 == 0:
                lam = view.lambda_hat + view.zeta
                imin = int(np.argmin(lam))
                a = view.Pfac.T @ g
                g = g - view.Pfac[:, imin] * a[imin]
                g = g + view.Pfac[:, imin] * 10.0 ** rng.uniform(-14, -9)
            elif trial % 3 == 1:
                g = g * 10.0 ** rng.uniform(-8, 8)
            Delta = 10.0 ** rng.uniform(-5, 4)
            sol = solve_obs(view, g, Delta)
            B = check_invariants(view, g, Delta, sol)
            q = float(g @ sol.p + 0.5 * sol.p @ B @ sol.p)
            q_ref = oracle_model_value(B, g, Delta)
            assert q <= q_ref + 1e-6 * max(1.0, abs(q_ref))

    def test_bp_identity(self, rng):
        for _ in range(20):
            n = int(rng.integers(5, 20))
            view = random_view(rng, n, 3, zetaC=float(rng.uniform(-0.5, 2.0)))
            g = rng.standard_normal(n)
            sol = solve_obs(view, g, 0.7)
            want = apply_B(view, sol.p)
            err = np.linalg.norm(sol.Bp - want)
            assert err <= 1e-7 * max(1.0, np.linalg.norm(want))


class TestSecularNewton:
    def test_single_term(self):
        sigma, _ = secular_newton(np.array([9.0]), np.array([1.0]), 0.0, 1.0,
                                  Delta=1.0, sigma0=0.5)
        assert sigma == pytest.approx(2.0, abs=1e-9)

    def test_residual_random(self, rng):
        checked = 0
        while checked < 30:
            r = int(rng.integers(1, 7))
            lambdas = np.sort(rng.uniform(-2.0, 3.0, r))
            a2 = rng.uniform(0.1, 2.0, r)
            gperp2 = float(rng.uniform(0.0, 2.0))
            lam_far = float(rng.uniform(lambdas.min(), 3.0))
            Delta = float(rng.uniform(0.2, 2.0))
            lam_min = min(lambdas.min(), lam_far)
            floor = max(0.0, -lam_min)
            sigma0 = floor + 1e-6

            def pnorm(sig):
                return np.sqrt(np.sum(a2 / (lambdas + sig) ** 2)
                               + gperp2 / (lam_far + sig) ** 2)

            if pnorm(sigma0) < Delta:  # precondition phi(sigma0) <= 0 violated
                continue
            checked += 1
            sigma, _ = secular_newton(a2, lambdas, gperp2, lam_far, Delta, sigma0)
            assert abs(pnorm(sigma) - Delta) <= 1e-9 * Delta

    def test_monotone_iterates(self):
        # concave increasing phi: iterates from the left never overshoot
        a2 = np.array([4.0, 1.0])
        lambdas = np.array([-1.0, 2.0])
        sigma, iters = secular_newton(a2, lambdas, 0.5, 3.0, Delta=0.5, sigma0=1.0 + 1e-8)
        assert sigma >= 1.0
        assert iters <= 100


class TestCauchyFallback:
    def test_long_gradient_clipped(self):
        g = np.array([5.0, 0.0])
        p, Bp = cauchy_fallback(g, 1.0)
        assert np.linalg.norm(p) == pytest.approx(1.0)
        assert np.array_equal(p, Bp)

    def test_short_gradient_full_step(self):
        g = np.array([0.5, 0.0])
        p, _ = cauchy_fallback(g, 1.0)
        assert np.allclose(p, -g)

    def test_direction_preserved(self):
        for t in (0.1, 1.0, 17.0):
            g = np.array([t, 0.0, 0.0])
            p, _ = cauchy_fallback(g, 2.0)
            assert p[0] < 0 and np.allclose(p[1:], 0)

    def test_zero_gradient_rejected(self):
        with pytest.raises(ValueError):
            cauchy_fallback(np.zeros(3), 1.0)


class TestSteihaugCg:
    def test_identity_one_iteration(self):
        g = np.array([1.0, 0.0])
        p, Bp, status = solve_steihaug_cg(lambda v: v, g, 10.0)
        assert status == "interior"
        assert np.allclose(p, -g)
        assert np.allclose(Bp, -g)

    def test_negative_curvature_goes_to_boundary(self):
        B = np.diag([-1.0, -2.0])
        g = np.array([1.0, 1.0])
        p, _, status = solve_steihaug_cg(lambda v: B @ v, g, 1.5)
        assert status == "boundary"
        assert np.linalg.norm(p) == pytest.approx(1.5)

    def test_pd_matches_newton_step(self, rng):
        A = rng.standard_normal((20, 20))
        B = A @ A.T + 20 * np.eye(20)
        g = rng.standard_normal(20)
        rtol = 1e-10
        p, Bp, status = solve_steihaug_cg(lambda v: B @ v, g, 1e6, rtol=rtol, maxit=200)
        assert status == "interior"
        pn = np.linalg.solve(B, -g)
        assert np.linalg.norm(p - pn) <= 1e-6 * np.linalg.norm(pn)
        assert np.allclose(Bp, B @ p, atol=1e-8 * np.linalg.norm(g))

    def test_never_leaves_region(self, rng):
        for _ in range(20):
            n = int(rng.integers(3, 15))
            A = rng.standard_normal((n, n))
            B = 0.5 * (A + A.T)
            g = rng.standard_normal(n)
            Delta = float(rng.uniform(0.1, 2.0))
            p, _, _ = solve_steihaug_cg(lambda v: B @ v, g, Delta)
            assert np.linalg.norm(p) <= Delta * (1 + 1e-12)

    def test_maxit_returns_interior(self, rng):
        A = rng.standard_normal((30, 30))
        B = A @ A.T + 1e-3 * np.eye(30)
        g = rng.standard_normal(30)
        p, _, status = solve_steihaug_cg(lambda v: B @ v, g, 1e9, rtol=1e-15, maxit=2)
        assert status == "maxit"
        assert np.linalg.norm(p) < 1e9
