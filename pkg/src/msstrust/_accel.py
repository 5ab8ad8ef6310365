"""Numba acceleration switch for the small dense kernels.

The hot kernels (pivoted LDL^T, Jacobi eigensolver, triangular solves) run
inside the solver loop once or twice per iteration.  They are compiled with
``numba.njit`` when available; a pure numpy/LAPACK path is used otherwise.

The environment variable ``MSSTRUST_NUMBA`` selects the path:

* ``auto`` (default) -- use numba when it imports cleanly;
* ``1`` / ``on``     -- require numba, raise if it is missing;
* ``0`` / ``off``    -- force the pure-numpy fallback.
"""

import os

_FLAG = os.environ.get("MSSTRUST_NUMBA", "auto").strip().lower()

if _FLAG in ("0", "off", "false", "no"):
    NUMBA_ENABLED = False
elif _FLAG in ("1", "on", "true", "yes", "force"):
    import numba  # noqa: F401  (raises if unavailable, which is the point)

    NUMBA_ENABLED = True
else:
    try:
        import numba  # noqa: F401

        NUMBA_ENABLED = True
    except ImportError:  # pragma: no cover - depends on environment
        NUMBA_ENABLED = False


def maybe_njit(func):
    """Decorate ``func`` with ``numba.njit(cache=True)`` when enabled."""
    if NUMBA_ENABLED:
        from numba import njit

        return njit(cache=True)(func)
    return func
