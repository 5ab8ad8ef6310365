import numpy as np
import pytest

from msstrust.mss_core import PairBuffer, apply_B, try_accept_pair


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def make_buffer(rng, n, l, m=None, spd_like=True):
    """Random pair buffer with l accepted pairs (y^T s > 0 when spd_like)."""
    buf = PairBuffer(n, m if m is not None else max(l, 1))
    while buf.l < l:
        s = rng.standard_normal(n)
        if spd_like:
            y = s + 0.4 * rng.standard_normal(n)
        else:
            y = rng.standard_normal(n)
        try_accept_pair(buf, s, y, "mss-positive" if spd_like else "always")
    return buf


def dense_from_view(view):
    """Materialize the model by applying it to the identity columns."""
    n = view.n
    B = np.empty((n, n))
    for j in range(n):
        e = np.zeros(n)
        e[j] = 1.0
        B[:, j] = apply_B(view, e)
    return 0.5 * (B + B.T)


def dense_oracle_B(S, Y, zeta, zetaC):
    """Explicit-projector evaluation of the model: B0 through an orthonormal
    basis of span([S, Y - zeta*S]) from numpy's QR, plus Psi M Psi^T
    assembled directly from the definition."""
    n = S.shape[0]
    G = S.T @ S
    W = np.linalg.inv(G)
    A = S.T @ Y
    E = np.diag(np.diag(A))
    T = np.triu(A, 1)
    Psi = np.hstack([S, Y - zeta * S])
    Mtop = W @ (zeta * G - (T + E + T.T)) @ W
    M = np.block([[Mtop, W], [W, np.zeros_like(W)]])
    Q = _orth(Psi)
    proj = Q @ Q.T
    B0 = zeta * proj + zetaC * (np.eye(n) - proj)
    B = B0 + Psi @ M @ Psi.T
    return 0.5 * (B + B.T)


def _orth(X, tol=1e-10):
    q, r = np.linalg.qr(X)
    keep = np.abs(np.diag(r)) > tol * max(np.abs(np.diag(r)).max(), 1e-300)
    return q[:, keep]
