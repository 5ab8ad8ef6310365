"""High-accuracy Euclidean trust-region subproblem solver over a spectral
view, plus the Steihaug truncated-CG solver and the Cauchy fallback.

Given the implicit eigendecomposition of ``B`` the subproblem

    min  g^T p + 0.5 p^T B p   s.t.  ||p|| <= Delta

is solved through the optimality conditions: a unique ``sigma* >= 0``
exists with ``(B + sigma* I) p = -g``, ``sigma* (Delta - ||p||) = 0`` and
``B + sigma* I`` PSD.  Interior solutions are returned directly; boundary
multipliers come from a monotone Newton iteration on the secular equation
``1/||p(sigma)|| - 1/Delta = 0``; the hard case (no gradient mass on the
minimal eigenspace) adds an explicit eigenvector component.
"""

from dataclasses import dataclass

import numpy as np

from .mss_core import SpectralView, apply_B

_HARD_CASE_RTOL = 1e-13       # gradient mass below this (relative) counts as zero
_CLUSTER_RTOL = 1e-12         # eigenvalues this close to lambda_min share its space
_SECULAR_RTOL = 1e-10         # |  ||p|| - Delta  | <= rtol * Delta at the root
_POLE_BAND = 1e-7             # relative resolution band around the pole
_FAR_SEED = 20210601          # deterministic seed for the far-space eigvector


class SubproblemError(RuntimeError):
    """The secular Newton iteration failed to converge (should not happen
    with the monotone initialization)."""


@dataclass
class SubproblemSolution:
    """Solution of one trust-region subproblem.

    ``Bp`` is the model-Hessian product with the returned step; ``sigma`` is
    the boundary multiplier (0 for interior solutions).
    """

    p: np.ndarray
    sigma: float
    Bp: np.ndarray
    on_boundary: bool
    hard_case: bool
    newton_iters: int


def cauchy_fallback(g: np.ndarray, Delta: float):
    """Cauchy step for the identity model: ``beta = min(||g||/Delta, 1)``,
    ``p = -(beta * Delta / ||g||) g`` (length ``min(||g||, Delta)``),
    ``Bp = p``."""
    g = np.asarray(g, dtype=np.float64)
    gnorm = float(np.linalg.norm(g))
    if not gnorm > 0:
        raise ValueError("gradient must be nonzero")
    beta = min(gnorm / Delta, 1.0)
    p = -(beta * Delta / gnorm) * g
    return p, p.copy()


def _pnorm2(sigma, a2, lambdas, gperp2, lambda_far):
    """``||p(sigma)||^2`` for the diagonalized secular system.

    Evaluations at a pole legitimately overflow to inf; callers test for
    finiteness, so the float warnings are silenced here.
    """
    with np.errstate(divide="ignore", over="ignore"):
        total = float(np.sum(a2 / (lambdas + sigma) ** 2))
        if gperp2 > 0.0:
            total += gperp2 / (lambda_far + sigma) ** 2
    return total


def _secular_newton_core(a2, lambdas, gperp2, lambda_far, Delta, sigma0,
                         max_iter):
    """Newton iteration; returns ``(sigma, iterations, converged)``.

    Non-convergence happens only when the root sits within floating-point
    resolution of the pole at ``-lambda_min`` (a nearly-hard instance); the
    caller resolves that regime separately.
    """
    a2 = np.asarray(a2, dtype=np.float64)
    lambdas = np.asarray(lambdas, dtype=np.float64)
    sigma = float(sigma0)
    for it in range(max_iter):
        pn2 = _pnorm2(sigma, a2, lambdas, gperp2, lambda_far)
        pn = np.sqrt(pn2)
        if abs(pn - Delta) <= _SECULAR_RTOL * Delta:
            return sigma, it, True
        if not np.isfinite(pn2):
            return sigma, it, False
        phi = 1.0 / pn - 1.0 / Delta
        with np.errstate(divide="ignore", over="ignore"):
            dpn2 = -2.0 * float(np.sum(a2 / (lambdas + sigma) ** 3))
            if gperp2 > 0.0:
                dpn2 -= 2.0 * gperp2 / (lambda_far + sigma) ** 3
        phi_prime = -0.5 * dpn2 / (pn2 * pn)
        if not phi_prime > 0.0:
            return sigma, it, False
        step = -phi / phi_prime
        if step <= 0.0:
            # phi >= 0: either roundoff at the root (fine) or a stall
            return sigma, it, abs(pn - Delta) <= 1e-8 * Delta
        if sigma + step == sigma:
            # resolution floor: the closest representable multiplier on the
            # phi <= 0 side; nothing more to gain at this precision
            return sigma, it, abs(pn - Delta) <= 1e-8 * Delta
        sigma += step
    return sigma, max_iter, False


def secular_newton(a2, lambdas, gperp2, lambda_far, Delta, sigma0,
                   max_iter: int = 100):
    """Monotone Newton iteration for the boundary multiplier.

    Requires ``sigma0 >= max(0, -lambda_min)`` with ``phi(sigma0) <= 0``
    where ``phi(sigma) = 1/||p(sigma)|| - 1/Delta``; phi is concave and
    increasing there, so the iterates increase monotonically to the root.
    Returns ``(sigma, iterations)`` with ``| ||p(sigma)|| - Delta | <=
    1e-10 * Delta``.
    """
    sigma, it, ok = _secular_newton_core(a2, lambdas, gperp2, lambda_far,
                                         Delta, sigma0, max_iter)
    if not ok:
        raise SubproblemError(
            f"secular Newton did not converge in {max_iter} iterations "
            f"(sigma={sigma}, Delta={Delta})"
        )
    return sigma, it


def _far_space_vector(view: SpectralView) -> np.ndarray:
    """Deterministic unit vector orthogonal to the spanned subspace."""
    rng = np.random.default_rng(_FAR_SEED)
    for _ in range(16):
        z = rng.standard_normal(view.n)
        if view.r:
            z -= view.Pfac @ (view.Pfac.T @ z)
        nz = np.linalg.norm(z)
        if nz > 1e-8 * np.sqrt(view.n):
            return z / nz
    raise SubproblemError("could not build a vector orthogonal to the spanned subspace")


def solve_obs(view: SpectralView, g: np.ndarray, Delta: float) -> SubproblemSolution:
    """Solve the subproblem to high accuracy over a spectral view.

    The gradient is split into spanned coefficients ``a = Ppar^T g`` and the
    complement ``gperp = g - Ppar a`` (whose squared norm is taken from the
    vector itself; the algebraic shortcut ``||g||^2 - ||a||^2`` cancels
    catastrophically in nearly-hard instances).  Eigenvalues are
    ``lambda_i = lhat_i + zeta`` on the spanned space and ``zetaC`` with
    multiplicity ``n - r`` on the rest.
    """
    g = np.asarray(g, dtype=np.float64)
    if not np.all(np.isfinite(g)):
        raise ValueError("gradient has non-finite entries")
    if not Delta > 0:
        raise ValueError("Delta must be positive")
    if g.shape[0] != view.n:
        raise ValueError("dimension mismatch")

    lambdas = view.spanned_eigenvalues()
    has_far = view.n > view.r
    lambda_far = view.zetaC
    if view.r:
        a = view.Pfac.T @ g
        gperp = g - view.Pfac @ a
    else:
        a = np.zeros(0)
        gperp = g.copy()
    # the explicit inner product avoids the cancellation of ||g||^2 - ||a||^2
    gperp2 = float(gperp @ gperp) if has_far else 0.0
    gnorm2 = float(g @ g)
    a2 = a * a

    cand = [lambdas.min()] if view.r else []
    if has_far:
        cand.append(lambda_far)
    lam_min = min(cand)
    gnorm = np.sqrt(gnorm2)

    scale = max(1.0, abs(lam_min))

    def build_p(sigma, exclude_below=0.0):
        """Step at multiplier sigma; denominators at or below
        ``exclude_below`` are dropped (pseudo-inverse step)."""
        p = np.zeros(view.n)
        if view.r:
            den = lambdas + sigma
            coef = np.zeros_like(a)
            mask = den > exclude_below
            coef[mask] = a[mask] / den[mask]
            p -= view.Pfac @ coef
        if has_far and gperp2 > 0.0:
            den_far = lambda_far + sigma
            if den_far > exclude_below:
                p -= gperp / den_far
        return p

    def model_value(p):
        Bp = apply_B(view, p)
        return float(g @ p + 0.5 * p @ Bp), Bp

    def augmented_step(sigma, iters):
        """Boundary step when the multiplier is pinned (numerically) at the
        pole: pseudo-inverse step plus a minimal-eigenvector component with
        the model-decreasing sign, filling up to the boundary."""
        p_hat = build_p(sigma, exclude_below=_POLE_BAND * max(scale, sigma))
        pn_hat = float(np.linalg.norm(p_hat))
        scaled = pn_hat >= Delta
        if scaled:
            p_hat *= Delta / pn_hat
            alpha = 0.0
        else:
            alpha = np.sqrt(Delta ** 2 - pn_hat ** 2)
        in_span = view.r and lambdas.min() <= lam_min + _POLE_BAND * max(scale, sigma)
        if in_span:
            i = int(np.argmin(lambdas))
            z = view.Pfac[:, i] / np.linalg.norm(view.Pfac[:, i])
            gz = a[i]
        else:
            z = _far_space_vector(view)
            gz = float(gperp @ z)
        if gz > 0.0:
            z = -z
        p = p_hat + alpha * z
        # -g - sigma*p is exact only for the unscaled pseudo-inverse step
        Bp = apply_B(view, p) if (alpha > 0.0 or scaled) else -g - sigma * p
        on_boundary = sigma > 0.0 or alpha > 0.0
        return SubproblemSolution(p, sigma, Bp, on_boundary, True, iters)

    def newton_branch(floor):
        sigma0 = _newton_start(a2, lambdas, gperp2, lambda_far, Delta, floor,
                               lam_min, gnorm)
        if sigma0 is None:
            # no representable multiplier with ||p(sigma)|| >= Delta above
            # the floor: the root is below floating-point resolution
            return augmented_step(floor, 0)
        sigma, iters, ok = _secular_newton_core(a2, lambdas, gperp2,
                                                lambda_far, Delta, sigma0, 100)
        pn = np.sqrt(_pnorm2(sigma, a2, lambdas, gperp2, lambda_far))
        if ok:
            p = build_p(sigma)
            return SubproblemSolution(p, sigma, -g - sigma * p, True, False, iters)
        # stalled: only legitimate within resolution of the pole, where the
        # secular equation is ill-conditioned; compare the rescaled plain
        # step against the eigenvector-augmented step
        if sigma + lam_min > _POLE_BAND * max(scale, sigma):
            raise SubproblemError(
                f"secular Newton stalled away from the pole "
                f"(sigma={sigma}, Delta={Delta})"
            )
        candidates = []
        aug = augmented_step(sigma, iters)
        q_aug, _ = model_value(aug.p)
        resid_aug = float(np.linalg.norm(aug.Bp + sigma * aug.p + g))
        candidates.append((q_aug, resid_aug, aug))
        if np.isfinite(pn) and 0.0 < pn <= 2.0 * Delta:
            plain = build_p(sigma)
            if pn > Delta:
                plain *= Delta / pn
            q_plain, Bp_plain = model_value(plain)
            resid_plain = float(np.linalg.norm(Bp_plain + sigma * plain + g))
            candidates.append((q_plain, resid_plain,
                               SubproblemSolution(plain, sigma, Bp_plain,
                                                  True, False, iters)))
        bound = 5e-8 * max(1.0, gnorm)
        admitted = [c for c in candidates if c[1] <= bound]
        if admitted:
            return min(admitted, key=lambda c: c[0])[2]
        return min(candidates, key=lambda c: c[1])[2]

    if lam_min > 0.0:
        pn0 = np.sqrt(_pnorm2(0.0, a2, lambdas, gperp2, lambda_far))
        if pn0 <= Delta:
            p = build_p(0.0)
            return SubproblemSolution(p, 0.0, -g, False, False, 0)
        return newton_branch(0.0)

    # lam_min <= 0: check the gradient mass on the minimal eigenspace
    cluster = _CLUSTER_RTOL * scale
    mass2 = 0.0
    if view.r:
        mass2 += float(np.sum(a2[lambdas <= lam_min + cluster]))
    if has_far and lambda_far <= lam_min + cluster:
        mass2 += gperp2
    if np.sqrt(mass2) > _HARD_CASE_RTOL * max(1.0, gnorm):
        return newton_branch(-lam_min)

    # hard case: no gradient mass on the minimal eigenspace
    sigma = -lam_min
    p_hat = build_p(sigma, exclude_below=cluster)
    if float(np.linalg.norm(p_hat)) > Delta * (1.0 + _SECULAR_RTOL):
        # enough gradient mass away from lambda_min: a boundary root exists
        return newton_branch(sigma)
    return augmented_step(sigma, 0)


def _newton_start(a2, lambdas, gperp2, lambda_far, Delta, floor, lam_min, gnorm):
    """Starting multiplier with ``phi(sigma0) <= 0``, or None.

    ``||p(sigma)|| <= ||g|| / (lam_min + sigma)`` gives an upper end where
    phi >= 0; bisecting down toward the floor finds a point on the phi <= 0
    side with a finite, overflow-free secular value.  None means no such
    point is representable above the floor (nearly-hard instance).
    """
    hi = max(floor, gnorm / Delta - lam_min)
    if hi <= floor:
        hi = floor + max(1.0, abs(floor))
    span = hi - floor
    sigma = hi
    for _ in range(200):
        if sigma > floor:
            pn2 = _pnorm2(sigma, a2, lambdas, gperp2, lambda_far)
            if np.isfinite(pn2) and pn2 >= Delta ** 2:
                return sigma
        span *= 0.5
        sigma = floor + span
    return None


def solve_steihaug_cg(applyB, g: np.ndarray, Delta: float,
                      rtol: float = 1e-6, maxit: int = 100):
    """Steihaug-Toint truncated CG for the trust-region subproblem.

    Starts from ``p = 0``; exits to the boundary along the current direction
    on negative curvature or when the iterate would leave the region, and
    exits interior once the residual drops below ``rtol * ||g||``.  Returns
    ``(p, Bp, status)`` with status in {"interior", "boundary", "maxit"};
    ``||p|| <= Delta`` always holds.
    """
    g = np.asarray(g, dtype=np.float64)
    if not Delta > 0:
        raise ValueError("Delta must be positive")
    n = g.shape[0]
    p = np.zeros(n)
    Bp = np.zeros(n)
    r = -g.copy()
    d = r.copy()
    gnorm = float(np.linalg.norm(g))
    if gnorm == 0.0:
        return p, Bp, "interior"
    rr = float(r @ r)
    for _ in range(maxit):
        Bd = applyB(d)
        dBd = float(d @ Bd)
        if dBd <= 0.0:
            tau = _boundary_tau(p, d, Delta)
            return p + tau * d, Bp + tau * Bd, "boundary"
        alpha = rr / dBd
        p_next = p + alpha * d
        if np.linalg.norm(p_next) >= Delta:
            tau = _boundary_tau(p, d, Delta)
            return p + tau * d, Bp + tau * Bd, "boundary"
        p = p_next
        Bp = Bp + alpha * Bd
        r = r - alpha * Bd
        rr_next = float(r @ r)
        if np.sqrt(rr_next) <= rtol * gnorm:
            return p, Bp, "interior"
        d = r + (rr_next / rr) * d
        rr = rr_next
    return p, Bp, "maxit"


def _boundary_tau(p, d, Delta):
    """Positive root of ``||p + tau d|| = Delta``."""
    dd = float(d @ d)
    pd = float(p @ d)
    pp = float(p @ p)
    disc = pd * pd + dd * (Delta ** 2 - pp)
    return (-pd + np.sqrt(max(disc, 0.0))) / dd
