"""Limited-memory pair window, compact curvature model, and its implicit
spectral view.

The model is ``B = B0 + Psi M Psi^T`` where ``B0`` is the dense
two-parameter initialization ``zeta * Ppar Ppar^T + zetaC * Pperp Pperp^T``
over the subspace spanned by the stored pairs.  Rank filtering of the step
matrix and of ``Psi`` goes through the pivoted LDL^T of the corresponding
Gram matrices, which also yields ``Ppar`` without any QR factorization.

``rank2_update_dense`` provides the dense rank-2 recursion that the compact
form condenses; it exists as a small-scale oracle for tests.
"""

from dataclasses import dataclass

import numpy as np

from .dense_kernels import gram, ldlt_pivoted, solve_upper_tri, sym_eig

MACHINE_EPS = float(np.finfo(np.float64).eps)

PAIR_RULES = ("mss-positive", "always")


class DependentStepError(ValueError):
    """The new step lies (numerically) in the span of the previous steps."""


class PairBuffer:
    """Windowed storage of quasi-Newton pairs, newest pair in column 0.

    Capacity ``m`` is the usual limited-memory window (3-7); accepting a
    pair at capacity evicts the oldest one.
    """

    def __init__(self, n: int, m: int):
        if m < 1:
            raise ValueError("memory m must be >= 1")
        self.n = int(n)
        self.m = int(m)
        self.S = np.zeros((self.n, 0))
        self.Y = np.zeros((self.n, 0))

    @property
    def l(self) -> int:
        return self.S.shape[1]

    def newest(self):
        """Return the most recently stored pair ``(s, y)``."""
        if self.l == 0:
            raise IndexError("empty pair buffer")
        return self.S[:, 0], self.Y[:, 0]

    def __repr__(self):
        return f"PairBuffer(n={self.n}, m={self.m}, l={self.l})"


def try_accept_pair(buffer: PairBuffer, s, y, rule: str = "mss-positive") -> bool:
    """Store ``(s, y)`` in the window if the acceptance rule admits it.

    Under ``"mss-positive"`` the pair is stored iff
    ``s^T y > eps * ||s|| * ||y||`` with machine epsilon ``eps``; under
    ``"always"`` it is stored unconditionally.  At capacity the oldest pair
    is evicted.  Returns True when the pair was stored.
    """
    if rule not in PAIR_RULES:
        raise ValueError(f"unknown acceptance rule {rule!r}")
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    snorm = np.linalg.norm(s)
    if not snorm > 0:
        raise ValueError("step s must be nonzero")
    if rule == "mss-positive":
        if not (s @ y > MACHINE_EPS * snorm * np.linalg.norm(y)):
            return False
    keep = buffer.l if buffer.l < buffer.m else buffer.m - 1
    buffer.S = np.column_stack([s, buffer.S[:, :keep]])
    buffer.Y = np.column_stack([y, buffer.Y[:, :keep]])
    return True


def sym_lower(A: np.ndarray) -> np.ndarray:
    """Symmetrize by reflecting the lower triangle: ``out_ij = A_ij`` if
    ``i >= j`` else ``A_ji``."""
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError("A must be square")
    return np.tril(A) + np.tril(A, -1).T


@dataclass
class CompactFactorization:
    """Factors of ``B = B0 + Psi M Psi^T`` after rank filtering.

    ``Psi = [S_hat, Y_hat - zeta*S_hat]`` over the step-filtered pairs,
    ``W = (S_hat^T S_hat)^-1``, and ``perm``/``Rdag``/``Rddag``/``J`` are the
    pivoted-LDL^T artifacts of ``Psi^T Psi``: ``Psi^T Psi ~= Pi Rdag^T Rdag
    Pi^T`` with ``Rdag`` of shape (r, q), ``Rddag`` its invertible leading
    (r, r) block, and ``J = perm[:r]`` the retained Psi columns.
    """

    Psi: np.ndarray
    M: np.ndarray
    W: np.ndarray
    perm: np.ndarray
    Rdag: np.ndarray
    Rddag: np.ndarray
    J: np.ndarray
    zeta: float
    zetaC: float

    @property
    def q(self) -> int:
        return self.Psi.shape[1]

    @property
    def r(self) -> int:
        return self.J.size


@dataclass
class SpectralView:
    """Implicit eigendecomposition ``B = Ppar (Lhat + zeta I) Ppar^T +
    zetaC (I - Ppar Ppar^T)`` with ``Ppar`` stored explicitly (n x r)."""

    Pfac: np.ndarray
    lambda_hat: np.ndarray
    zeta: float
    zetaC: float
    n: int

    @property
    def r(self) -> int:
        return self.lambda_hat.size

    def spanned_eigenvalues(self) -> np.ndarray:
        """Eigenvalues carried by the spanned subspace, ascending."""
        return self.lambda_hat + self.zeta


def empty_view(n: int, zeta: float, zetaC: float) -> SpectralView:
    """View of ``B = zetaC * I`` (no usable pairs)."""
    return SpectralView(np.zeros((n, 0)), np.zeros(0), float(zeta), float(zetaC), int(n))


def build_compact(buffer: PairBuffer, zeta: float, zetaC: float,
                  tol: float = 1e-8):
    """Assemble the compact factorization from the pair window.

    Steps whose columns are numerically dependent (pivoted LDL^T of
    ``S^T S`` below ``tol``) are dropped together with their aligned
    gradient differences.  Under the dense initialization ``B0 S = zeta*S``
    (the spanned projector reproduces S), so ``Psi = [S, Y - zeta*S]`` and
    ``S^T B0 S = zeta * S^T S``.  Returns None when no step survives the
    filter; the caller then treats ``B = B0``.
    """
    if buffer.l < 1:
        raise ValueError("pair buffer is empty")
    fac = ldlt_pivoted(gram(buffer.S), tol)
    if fac.rank == 0:
        return None
    keep = np.sort(fac.kept)
    S = buffer.S[:, keep]
    Y = buffer.Y[:, keep]
    G = gram(S)
    A = S.T @ Y
    E = np.diag(np.diag(A))
    T = np.triu(A, 1)
    W = np.linalg.solve(G, np.eye(G.shape[0]))
    W = 0.5 * (W + W.T)
    Psi = np.hstack([S, Y - zeta * S])
    Mtop = W @ (zeta * G - (T + E + T.T)) @ W
    lhat = S.shape[1]
    M = np.block([[0.5 * (Mtop + Mtop.T), W], [W, np.zeros((lhat, lhat))]])
    pfac = ldlt_pivoted(gram(Psi), tol)
    r = pfac.rank
    Rdag = np.sqrt(pfac.D[:r])[:, None] * pfac.L[:, :r].T
    Rddag = Rdag[:, :r]
    return CompactFactorization(
        Psi=Psi, M=M, W=W, perm=pfac.perm, Rdag=Rdag, Rddag=Rddag,
        J=pfac.perm[:r], zeta=float(zeta), zetaC=float(zetaC),
    )


def spectral_view(cf: CompactFactorization) -> SpectralView:
    """Compute the implicit eigendecomposition of the compact model.

    Diagonalizes the (r, r) sandwich ``Rdag Pi^T M Pi Rdag^T`` and maps its
    eigenvectors back through ``Ppar = (Psi Pi)_J Rddag^{-1} U``.
    """
    if cf is None:
        raise ValueError("empty compact factorization")
    Mp = cf.M[np.ix_(cf.perm, cf.perm)]
    mid = cf.Rdag @ Mp @ cf.Rdag.T
    eig = sym_eig(0.5 * (mid + mid.T))
    X = solve_upper_tri(cf.Rddag, eig.U)
    Pfac = cf.Psi[:, cf.J] @ X
    return SpectralView(Pfac, eig.lam, cf.zeta, cf.zetaC, cf.Psi.shape[0])


def apply_B(view: SpectralView, v: np.ndarray) -> np.ndarray:
    """Multiply the compact model: ``Ppar (Lhat + zeta I) Ppar^T v +
    zetaC (v - Ppar Ppar^T v)``, costing O(n r)."""
    v = np.asarray(v, dtype=np.float64)
    if v.shape[0] != view.n:
        raise ValueError("dimension mismatch")
    if view.r == 0:
        return view.zetaC * v
    a = view.Pfac.T @ v
    return view.Pfac @ ((view.lambda_hat + view.zeta) * a) + view.zetaC * (v - view.Pfac @ a)


def full_eigenvalues(view: SpectralView) -> np.ndarray:
    """The complete eigenvalue multiset ``{lhat_i + zeta} U {zetaC}^(n-r)``,
    sorted ascending."""
    vals = np.concatenate([
        view.spanned_eigenvalues(),
        np.full(view.n - view.r, view.zetaC),
    ])
    return np.sort(vals)


def cond_and_norm(view: SpectralView):
    """Return ``(cond, norm)`` of the model from its eigenvalue multiset:
    norm is ``max |lambda|`` and cond is ``norm / min |lambda|`` (inf when
    some eigenvalue vanishes)."""
    vals = np.abs(full_eigenvalues(view))
    norm = float(vals.max())
    vmin = float(vals.min())
    cond = np.inf if vmin == 0.0 else norm / vmin
    return cond, norm


def rank2_update_dense(B: np.ndarray, s, y, Sprev: np.ndarray) -> np.ndarray:
    """One dense rank-2 multipoint-secant update (small-scale oracle).

    Uses the least-change direction ``c = (I - P_Sprev) s`` (projection via
    the normal equations of ``Sprev``); the result is symmetric and maps
    ``s`` to ``y``.  Raises :class:`DependentStepError` when ``c^T s ~ 0``,
    i.e. ``s`` lies in the span of the previous steps.
    """
    B = np.asarray(B, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    Sprev = np.asarray(Sprev, dtype=np.float64)
    if Sprev.size and Sprev.shape[1] > 0:
        c = s - Sprev @ np.linalg.solve(gram(Sprev), Sprev.T @ s)
    else:
        c = s.copy()
    sc = float(s @ c)
    if abs(sc) <= 1e-12 * float(np.linalg.norm(s) ** 2):
        raise DependentStepError("step is linearly dependent on previous steps")
    return _rank2_with_c(B, s, y, c)


def _rank2_with_c(B, s, y, c):
    """The raw rank-2 formula; invariant under rescaling of ``c``."""
    sc = float(s @ c)
    resid = y - B @ s
    Bn = B + (np.outer(resid, c) + np.outer(c, resid)) / sc \
        - (resid @ s) * np.outer(c, c) / sc ** 2
    return 0.5 * (Bn + Bn.T)
