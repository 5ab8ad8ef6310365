"""Loop-level cores for the small dense factorizations.

All kernels operate on float64 arrays of order <= 2m+2 (m <= 7).  They are
written as explicit loops so that :func:`msstrust._accel.maybe_njit` can
compile them; the numpy fallbacks live in :mod:`msstrust.dense_kernels`.
"""

import numpy as np

from ._accel import maybe_njit


@maybe_njit
def ldlt_pivoted_core(A, tol):
    """Diagonally pivoted LDL^T of a PSD matrix with rank detection.

    Pivots on the largest remaining Schur diagonal, so pivots come out in
    non-increasing order and the retained set is a prefix of the pivot
    order.  Elimination stops at the first pivot failing
    ``d > tol * max_pivot``; trailing diagonal entries are recorded
    un-eliminated so every dropped pivot demonstrably fails the threshold.

    Returns ``(L, D, perm, r)`` with unit-lower ``L`` and ``D`` in pivot
    order, ``perm`` the pivot-order-to-original index map, and ``r`` the
    number of retained pivots.
    """
    k = A.shape[0]
    work = A.copy()
    L = np.eye(k)
    D = np.zeros(k)
    perm = np.arange(k)
    r = 0
    maxpiv = 0.0
    active = True
    for j in range(k):
        p = j
        dbest = work[j, j]
        for t in range(j + 1, k):
            if work[t, t] > dbest:
                dbest = work[t, t]
                p = t
        if p != j:
            for t in range(k):
                tmp = work[j, t]
                work[j, t] = work[p, t]
                work[p, t] = tmp
            for t in range(k):
                tmp = work[t, j]
                work[t, j] = work[t, p]
                work[t, p] = tmp
            for t in range(j):
                tmp = L[j, t]
                L[j, t] = L[p, t]
                L[p, t] = tmp
            tmp_i = perm[j]
            perm[j] = perm[p]
            perm[p] = tmp_i
        piv = work[j, j]
        if j == 0:
            maxpiv = abs(piv)
        if active and (piv <= 0.0 or piv <= tol * maxpiv):
            active = False
        D[j] = piv
        if active:
            r = j + 1
            for i in range(j + 1, k):
                L[i, j] = work[i, j] / piv
            for i in range(j + 1, k):
                lij = L[i, j]
                for t in range(j + 1, k):
                    work[i, t] -= lij * piv * L[t, j]
    return L, D, perm, r


@maybe_njit
def jacobi_eig_core(A):
    """Cyclic Jacobi eigendecomposition of a symmetric matrix.

    Sweeps until the off-diagonal Frobenius mass falls below
    ``1e-14 * ||A||_F`` (or 60 sweeps).  Returns ``(U, lam)`` with
    eigenvalues ascending; deterministic for identical input.
    """
    k = A.shape[0]
    W = A.copy()
    U = np.eye(k)
    fro = 0.0
    for i in range(k):
        for j in range(k):
            fro += W[i, j] * W[i, j]
    fro = np.sqrt(fro)
    thresh = 1e-14 * fro
    for _sweep in range(60):
        off = 0.0
        for i in range(k - 1):
            for j in range(i + 1, k):
                off += 2.0 * W[i, j] * W[i, j]
        off = np.sqrt(off)
        if off <= thresh:
            break
        for p in range(k - 1):
            for q in range(p + 1, k):
                apq = W[p, q]
                if abs(apq) <= 1e-300:
                    continue
                tau = (W[q, q] - W[p, p]) / (2.0 * apq)
                if tau >= 0.0:
                    t = 1.0 / (tau + np.sqrt(1.0 + tau * tau))
                else:
                    t = -1.0 / (-tau + np.sqrt(1.0 + tau * tau))
                c = 1.0 / np.sqrt(1.0 + t * t)
                s = t * c
                for i in range(k):
                    wip = W[i, p]
                    wiq = W[i, q]
                    W[i, p] = c * wip - s * wiq
                    W[i, q] = s * wip + c * wiq
                for i in range(k):
                    wpi = W[p, i]
                    wqi = W[q, i]
                    W[p, i] = c * wpi - s * wqi
                    W[q, i] = s * wpi + c * wqi
                W[p, q] = 0.0
                W[q, p] = 0.0
                for i in range(k):
                    uip = U[i, p]
                    uiq = U[i, q]
                    U[i, p] = c * uip - s * uiq
                    U[i, q] = s * uip + c * uiq
    lam = np.zeros(k)
    for i in range(k):
        lam[i] = W[i, i]
    order = np.argsort(lam)
    lam_sorted = lam[order]
    U_sorted = np.empty_like(U)
    for j in range(k):
        for i in range(k):
            U_sorted[i, j] = U[i, order[j]]
    return U_sorted, lam_sorted


@maybe_njit
def solve_upper_core(R, B):
    """Back substitution for upper-triangular ``R X = B``.

    Returns ``(X, status)``; status 1 flags a diagonal entry below
    ``1e-14 * max |diag|``.
    """
    r = R.shape[0]
    c = B.shape[1]
    X = np.zeros((r, c))
    maxd = 0.0
    for i in range(r):
        if abs(R[i, i]) > maxd:
            maxd = abs(R[i, i])
    for i in range(r):
        if abs(R[i, i]) < 1e-14 * maxd or R[i, i] == 0.0:
            return X, 1
    for j in range(c):
        for i in range(r - 1, -1, -1):
            acc = B[i, j]
            for t in range(i + 1, r):
                acc -= R[i, t] * X[t, j]
            X[i, j] = acc / R[i, i]
    return X, 0
