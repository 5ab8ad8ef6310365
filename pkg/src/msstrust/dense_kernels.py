"""Small dense linear algebra: pivoted LDL^T with rank detection, symmetric
eigendecomposition, and triangular solves for matrices of order <= 2m+2,
plus the tall-skinny Gram product.

Two implementations back each factorization: a numba-compiled loop kernel
(:mod:`msstrust._kernels`) and a pure numpy/LAPACK path.  See
:mod:`msstrust._accel` for how the path is selected.
"""

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import _kernels
from ._accel import NUMBA_ENABLED

DEFAULT_RANK_TOL = 1e-8


class SingularTriangularError(np.linalg.LinAlgError):
    """An upper-triangular solve hit a (near-)zero diagonal entry."""


@dataclass(frozen=True)
class LdltFactor:
    """Pivoted LDL^T factors of a PSD matrix, pivots in decreasing order.

    ``perm[a]`` is the original index eliminated at pivot step ``a``, so
    ``A[perm][:, perm] ~= L @ diag(D) @ L.T``.  ``kept`` lists the original
    indices of retained pivots (a prefix of the pivot order); a PSD matrix
    with no positive pivot yields ``kept`` of length zero, which callers
    treat as a degenerate input.
    """

    L: np.ndarray
    D: np.ndarray
    perm: np.ndarray
    kept: np.ndarray

    @property
    def rank(self) -> int:
        return self.kept.size

    def reconstruct(self) -> np.ndarray:
        """Return ``P L diag(D) L^T P^T`` in the original index order."""
        k = self.perm.size
        rec = self.L @ np.diag(self.D) @ self.L.T
        out = np.empty_like(rec)
        ix = np.argsort(self.perm)
        out[:, :] = rec[np.ix_(ix, ix)]
        return out


@dataclass(frozen=True)
class SymEig:
    """Orthogonal eigendecomposition ``A = U diag(lam) U^T``, ``lam`` ascending."""

    U: np.ndarray
    lam: np.ndarray


def _as_matrix(A, name="A"):
    A = np.ascontiguousarray(A, dtype=np.float64)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"{name} must be a square matrix, got shape {A.shape}")
    return A


def _check_symmetric(A, name="A"):
    scale = max(1.0, float(np.abs(A).max(initial=0.0)))
    if np.abs(A - A.T).max(initial=0.0) > 1e-8 * scale:
        raise ValueError(f"{name} is not symmetric")
    return 0.5 * (A + A.T)


def gram(X: np.ndarray) -> np.ndarray:
    """Return ``X^T X``, symmetrized exactly after accumulation."""
    X = np.asarray(X, dtype=np.float64)
    if X.ndim != 2:
        raise ValueError("X must be a 2-D array")
    G = X.T @ X
    return 0.5 * (G + G.T)


def ldlt_pivoted(A: np.ndarray, tol: float = DEFAULT_RANK_TOL) -> LdltFactor:
    """Diagonally pivoted LDL^T of a symmetric PSD matrix with rank filtering.

    Pivots on the largest remaining diagonal, so the retained pivot set is
    the prefix of pivots satisfying ``D_ii > tol * max_j |D_jj|``.  An input
    with no retained pivot (numerically zero matrix) comes back with an
    empty ``kept``; the caller decides how to fall back.
    """
    A = _check_symmetric(_as_matrix(A), "A")
    if not tol > 0:
        raise ValueError("tol must be positive")
    k = A.shape[0]
    if k == 0:
        z = np.zeros((0, 0))
        return LdltFactor(z, np.zeros(0), np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64))
    if NUMBA_ENABLED:
        L, D, perm, r = _kernels.ldlt_pivoted_core(A, float(tol))
    else:
        L, D, perm, r = _ldlt_pivoted_numpy(A, float(tol))
    return LdltFactor(L, D, np.asarray(perm, dtype=np.int64), np.asarray(perm[:r], dtype=np.int64))


def _ldlt_pivoted_numpy(A, tol):
    """Vectorized fallback with the same pivot rule as the loop kernel."""
    k = A.shape[0]
    work = A.copy()
    L = np.eye(k)
    D = np.zeros(k)
    perm = np.arange(k)
    r = 0
    maxpiv = 0.0
    active = True
    for j in range(k):
        p = j + int(np.argmax(np.diag(work)[j:]))
        if p != j:
            work[[j, p], :] = work[[p, j], :]
            work[:, [j, p]] = work[:, [p, j]]
            L[[j, p], :j] = L[[p, j], :j]
            perm[[j, p]] = perm[[p, j]]
        piv = work[j, j]
        if j == 0:
            maxpiv = abs(piv)
        if active and (piv <= 0.0 or piv <= tol * maxpiv):
            active = False
        D[j] = piv
        if active:
            r = j + 1
            L[j + 1:, j] = work[j + 1:, j] / piv
            work[j + 1:, j + 1:] -= piv * np.outer(L[j + 1:, j], L[j + 1:, j])
    return L, D, perm, r


def sym_eig(A: np.ndarray) -> SymEig:
    """Full symmetric eigendecomposition with ascending eigenvalues.

    The numba path runs a cyclic Jacobi iteration; the fallback calls
    ``numpy.linalg.eigh``.  Both are deterministic for identical input.
    """
    A = _check_symmetric(_as_matrix(A), "A")
    if A.shape[0] == 0:
        return SymEig(np.zeros((0, 0)), np.zeros(0))
    if NUMBA_ENABLED:
        U, lam = _kernels.jacobi_eig_core(A)
    else:
        lam, U = np.linalg.eigh(A)
    return SymEig(U, lam)


def solve_upper_tri(R: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Solve ``R X = B`` with upper-triangular ``R``.

    Raises :class:`SingularTriangularError` when a diagonal entry falls
    below ``1e-14 * max |diag|``.
    """
    R = _as_matrix(R, "R")
    B = np.ascontiguousarray(B, dtype=np.float64)
    squeeze = B.ndim == 1
    if squeeze:
        B = B[:, None]
    if B.shape[0] != R.shape[0]:
        raise ValueError("R and B have incompatible shapes")
    if R.shape[0] == 0:
        X = np.zeros((0, B.shape[1]))
        return X[:, 0] if squeeze else X
    if NUMBA_ENABLED:
        X, status = _kernels.solve_upper_core(R, B)
        if status != 0:
            raise SingularTriangularError("upper-triangular matrix is numerically singular")
    else:
        d = np.abs(np.diag(R))
        if d.min() < 1e-14 * d.max() or d.min() == 0.0:
            raise SingularTriangularError("upper-triangular matrix is numerically singular")
        X = scipy.linalg.solve_triangular(R, B, lower=False)
    return X[:, 0] if squeeze else X
