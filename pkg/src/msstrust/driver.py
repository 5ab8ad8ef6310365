"""Trust-region drivers: the multipoint-symmetric-secant method with the
dense initialization, and a limited-memory SR1 baseline solved by truncated
CG.

Both share the same radius management and termination rules.  Each
iteration costs exactly one function and one gradient evaluation: the trial
point is always evaluated, and the quasi-Newton pair formed from it is
offered to the window whether or not the step is accepted.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .dense_kernels import sym_eig
from .init_params import InitOption, choose_params
from .mss_core import PairBuffer, build_compact, cond_and_norm, empty_view, \
    spectral_view, try_accept_pair
from .tr_subproblem import cauchy_fallback, solve_obs, solve_steihaug_cg

MACHINE_EPS = float(np.finfo(np.float64).eps)

SOLVER_KINDS = ("mss", "lsr1-bb", "lsr1-id")
STATUSES = ("converged", "iter-limit", "feval-limit", "delta-collapse")


@dataclass
class TrConfig:
    """Trust-region parameters.

    Defaults: acceptance at rho >= 0.01, growth at rho >= 0.75 for
    near-boundary steps, halving on rejection, conditioning gates
    cond(B) <= 1e12 and ||B|| <= 1e15, gradient tolerance 1e-5 (relative
    with an absolute floor), budgets 2n iterations / 100n evaluations, and
    radius collapse below 100 machine epsilons.
    """

    eta1: float = 0.01
    eta2: float = 0.75
    gamma1: float = 0.5
    gamma2: float = 2.0
    gamma_p: float = 0.8
    m: int = 5
    option: str = "half-sum-bb"
    tau: float = 1e12
    tau_hat: float = 1e15
    tau_g: float = 1e-5
    max_iters: int | None = None     # defaults to 2n
    max_fevals: int | None = None    # defaults to 100n
    delta_min: float = 100.0 * MACHINE_EPS
    delta0: float = 1.0
    solver: str = "mss"
    pair_rule: str = "mss-positive"
    rank_tol: float = 1e-8
    record_history: bool = False

    def validate(self):
        if not (0.0 < self.eta1 < self.eta2 < 1.0):
            raise ValueError("need 0 < eta1 < eta2 < 1")
        if not (0.0 < self.gamma1 < 1.0 < self.gamma2):
            raise ValueError("need 0 < gamma1 < 1 < gamma2")
        if not (0.0 < self.gamma_p < 1.0):
            raise ValueError("need 0 < gamma_p < 1")
        if self.solver not in SOLVER_KINDS:
            raise ValueError(f"unknown solver {self.solver!r}")
        if self.m < 1:
            raise ValueError("memory m must be >= 1")
        if not self.delta0 > 0:
            raise ValueError("delta0 must be positive")
        return self

    def budgets(self, n: int):
        iters = self.max_iters if self.max_iters is not None else 2 * n
        fevals = self.max_fevals if self.max_fevals is not None else 100 * n
        return iters, fevals


@dataclass
class HistoryEntry:
    iteration: int
    f: float
    gnorm: float
    delta_before: float
    delta_after: float
    rho: float
    pnorm: float
    accepted: bool
    fallback: bool
    cond: float
    bnorm: float


@dataclass
class SolveReport:
    """Outcome of one solver run (fevals == gevals == iters + 1)."""

    status: str
    iters: int
    fevals: int
    gevals: int
    final_gnorm: float
    final_f: float
    wall_ms: float
    fallback_steps: int
    history: list = field(default_factory=list)


@dataclass
class TrState:
    x: np.ndarray
    f: float
    g: np.ndarray
    Delta: float


def compute_rho(f_new: float, f: float, g, p, Bp) -> float:
    """Actual-over-predicted reduction ratio.

    The predicted reduction ``d = -g^T p - 0.5 p^T Bp`` must be positive for
    a model-decreasing step; a degenerate or negative prediction, or a
    non-finite trial value, yields ``-inf`` so the step is rejected.
    """
    d = -float(np.dot(g, p)) - 0.5 * float(np.dot(p, Bp))
    eps_den = 1e-16 * max(1.0, abs(f))
    if not np.isfinite(f_new) or not np.isfinite(d) or d <= eps_den:
        return -np.inf
    return (f - f_new) / d


def update_radius(state: TrState, f_new: float, g_new, p, Bp, config: TrConfig):
    """Accept/reject the trial step and update the radius.

    On ``rho >= eta1`` the iterate moves to the trial point (whose gradient
    was already evaluated); with ``rho >= eta2`` and a near-boundary step
    the radius doubles.  Rejected steps halve the radius.  Returns
    ``(accepted, rho)``.
    """
    rho = compute_rho(f_new, state.f, state.g, p, Bp)
    if rho >= config.eta1:
        state.x = state.x + p
        state.f = f_new
        state.g = g_new
        if rho >= config.eta2 and np.linalg.norm(p) > config.gamma_p * state.Delta:
            state.Delta = config.gamma2 * state.Delta
        return True, rho
    state.Delta = config.gamma1 * state.Delta
    return False, rho


def check_termination(gnorm, g0norm, iters, fevals, Delta, config: TrConfig, n: int):
    """Return a status string, or None to continue."""
    max_iters, max_fevals = config.budgets(n)
    if gnorm <= max(config.tau_g * g0norm, config.tau_g):
        return "converged"
    if iters >= max_iters:
        return "iter-limit"
    if fevals >= max_fevals:
        return "feval-limit"
    if Delta < config.delta_min:
        return "delta-collapse"
    return None


class _MssModel:
    """Compact MSS model with the dense initialization and cond gate."""

    def __init__(self, n, config: TrConfig):
        self.config = config
        self.buffer = PairBuffer(n, config.m)
        self.opt = InitOption(config.option)
        self.n = n

    def register_pair(self, s, y):
        return try_accept_pair(self.buffer, s, y, self.config.pair_rule)

    def step(self, g, Delta):
        if self.buffer.l >= 1:
            zeta, zetaC = choose_params(self.opt, self.buffer)
            cf = build_compact(self.buffer, zeta, zetaC, self.config.rank_tol)
            view = spectral_view(cf) if cf is not None else empty_view(self.n, zeta, zetaC)
        else:
            view = empty_view(self.n, self.opt.zeta_prev, self.opt.zetaC_prev)
        cond, bnorm = cond_and_norm(view)
        if cond <= self.config.tau and bnorm <= self.config.tau_hat:
            sol = solve_obs(view, g, Delta)
            return sol.p, sol.Bp, False, cond, bnorm
        p, Bp = cauchy_fallback(g, Delta)
        return p, Bp, True, cond, bnorm


class _Sr1Model:
    """Compact limited-memory SR1 model solved with Steihaug CG.

    ``B = gamma I + Psi Mid^{-1} Psi^T`` with ``Psi = Y - gamma S`` and
    ``Mid = D + L + L^T - gamma S^T S`` over pairs in oldest-first order.
    The middle matrix is applied through its eigendecomposition, dropping
    eigenvalues below ``1e-12`` of the largest so nearly-dependent pair
    contributions are skipped rather than inverted.
    """

    def __init__(self, n, config: TrConfig):
        self.config = config
        self.buffer = PairBuffer(n, config.m)
        self.n = n
        self.gamma = 1.0
        self._refresh()

    def _refresh(self):
        if self.buffer.l == 0:
            self.Psi = np.zeros((self.n, 0))
            self.core = None
            return
        S = self.buffer.S[:, ::-1]  # oldest first
        Y = self.buffer.Y[:, ::-1]
        A = S.T @ Y
        mid = np.diag(np.diag(A)) + np.tril(A, -1) + np.tril(A, -1).T \
            - self.gamma * (S.T @ S)
        eig = sym_eig(0.5 * (mid + mid.T))
        keep = np.abs(eig.lam) > 1e-12 * max(np.abs(eig.lam).max(), 1e-300)
        self.Psi = Y - self.gamma * S
        self.core = (eig.U[:, keep], eig.lam[keep])

    def apply(self, v):
        out = self.gamma * v
        if self.core is not None and self.core[1].size:
            U, lam = self.core
            t = U.T @ (self.Psi.T @ v)
            out = out + self.Psi @ (U @ (t / lam))
        return out

    def register_pair(self, s, y):
        resid = y - self.apply(s)
        rn = np.linalg.norm(resid)
        if not abs(s @ resid) > 1e-8 * rn * np.linalg.norm(s):
            return False  # includes resid == 0: the update is undefined there
        keep = self.buffer.l if self.buffer.l < self.buffer.m else self.buffer.m - 1
        self.buffer.S = np.column_stack([s, self.buffer.S[:, :keep]])
        self.buffer.Y = np.column_stack([y, self.buffer.Y[:, :keep]])
        if self.config.solver == "lsr1-bb":
            den = float(y @ s)
            if abs(den) > 1e-300:
                self.gamma = float(y @ y) / den
        self._refresh()
        return True

    def step(self, g, Delta):
        gnorm = np.linalg.norm(g)
        rtol = min(0.5, np.sqrt(gnorm))
        p, Bp, _status = solve_steihaug_cg(self.apply, g, Delta, rtol=rtol,
                                           maxit=max(20, 10 * (self.config.m + 1)))
        return p, Bp, False, np.nan, np.nan


def _run(problem, config: TrConfig, model) -> SolveReport:
    config.validate()
    n = problem.n
    t0 = time.perf_counter()
    x = np.array(problem.x0, dtype=np.float64, copy=True)
    f = float(problem.eval_f(x))
    g = np.asarray(problem.eval_g(x), dtype=np.float64)
    if not np.isfinite(f) or not np.all(np.isfinite(g)):
        raise ValueError(f"{problem.name}: non-finite objective or gradient at x0")
    fevals = gevals = 1
    state = TrState(x=x, f=f, g=g, Delta=config.delta0)
    g0norm = float(np.linalg.norm(g))
    gnorm = g0norm
    iters = 0
    fallback_steps = 0
    history = []
    while True:
        status = check_termination(gnorm, g0norm, iters, fevals, state.Delta,
                                   config, n)
        if status is not None:
            break
        if iters == 0:
            # steepest-descent start with the identity model
            p = -state.g
            Bp = -state.g
            fallback = False
            cond = bnorm = 1.0
        else:
            p, Bp, fallback, cond, bnorm = model.step(state.g, state.Delta)
        if fallback:
            fallback_steps += 1
        x_trial = state.x + p
        f_new = float(problem.eval_f(x_trial))
        g_new = np.asarray(problem.eval_g(x_trial), dtype=np.float64)
        fevals += 1
        gevals += 1
        y = g_new - state.g
        if np.all(np.isfinite(y)) and np.linalg.norm(p) > 0:
            model.register_pair(p.copy(), y)
        delta_before = state.Delta
        accepted, rho = update_radius(state, f_new, g_new, p, Bp, config)
        if accepted:
            gnorm = float(np.linalg.norm(state.g))
        iters += 1
        if config.record_history:
            history.append(HistoryEntry(
                iteration=iters, f=state.f, gnorm=gnorm,
                delta_before=delta_before, delta_after=state.Delta, rho=rho,
                pnorm=float(np.linalg.norm(p)), accepted=accepted,
                fallback=fallback, cond=cond, bnorm=bnorm,
            ))
    wall_ms = (time.perf_counter() - t0) * 1e3
    return SolveReport(
        status=status, iters=iters, fevals=fevals, gevals=gevals,
        final_gnorm=gnorm, final_f=state.f, wall_ms=wall_ms,
        fallback_steps=fallback_steps, history=history,
    )


def mss_solve(problem, config: TrConfig) -> SolveReport:
    """Run the MSS trust-region method with the dense initialization."""
    if config.solver != "mss":
        raise ValueError("config.solver must be 'mss'")
    return _run(problem, config, _MssModel(problem.n, config))


def lsr1_solve(problem, config: TrConfig) -> SolveReport:
    """Run the limited-memory SR1 trust-region baseline."""
    if config.solver not in ("lsr1-bb", "lsr1-id"):
        raise ValueError("config.solver must be 'lsr1-bb' or 'lsr1-id'")
    return _run(problem, config, _Sr1Model(problem.n, config))


def solve(problem, config: TrConfig) -> SolveReport:
    """Dispatch on ``config.solver``."""
    if config.solver == "mss":
        return mss_solve(problem, config)
    return lsr1_solve(problem, config)
