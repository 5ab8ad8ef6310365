"""Initialization parameters (zeta, zetaC) for the dense two-parameter
initial matrix, with the safeguarding used in the experiments.

Four named options are supported (CLI names in parentheses):

* Option 1 (``bb``):          zeta = zetaC = BB ratio of the newest pair.
* Option 2 (``sum``):         zeta = zetaC = sum of BB ratios over the window.
* Option 3 (``half-sum-bb``): zeta = half that sum, zetaC = newest BB ratio.
* Option 4 (``max-bb``):      zeta = max BB ratio over the window, zetaC =
  newest BB ratio.

Any candidate outside ``[1e-4, 1e4]`` (including negative or non-finite
values, or a ratio whose denominator vanished) falls back to the previous
safeguarded value; both parameters start at 1.
"""

from dataclasses import dataclass

import numpy as np

from .mss_core import PairBuffer

SAFEGUARD_LO = 1e-4
SAFEGUARD_HI = 1e4

OPTION_TAGS = ("bb", "sum", "half-sum-bb", "max-bb")


class ZeroCurvatureError(ZeroDivisionError):
    """A BB-style ratio had a zero denominator ``y^T s``."""


@dataclass
class InitOption:
    """Selected option plus the previous safeguarded values."""

    tag: str
    zeta_prev: float = 1.0
    zetaC_prev: float = 1.0

    def __post_init__(self):
        if self.tag not in OPTION_TAGS:
            raise ValueError(f"unknown init option {self.tag!r}; choose from {OPTION_TAGS}")


def bb_ratio(s, y) -> float:
    """Barzilai-Borwein ratio ``y^T y / y^T s``."""
    s = np.asarray(s, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    den = float(y @ s)
    if den == 0.0:
        raise ZeroCurvatureError("y^T s is zero")
    return float(y @ y) / den


def _pair_ratios(buffer: PairBuffer) -> np.ndarray:
    if buffer.l < 1:
        raise ValueError("pair buffer is empty")
    num = np.einsum("ij,ij->j", buffer.Y, buffer.Y)
    den = np.einsum("ij,ij->j", buffer.Y, buffer.S)
    if np.any(den == 0.0):
        raise ZeroCurvatureError("some stored pair has y^T s = 0")
    return num / den


def zeta_sum_ratios(buffer: PairBuffer) -> float:
    """Sum of the BB ratios over the stored pairs (reduces to the BB ratio
    for a single pair)."""
    return float(_pair_ratios(buffer).sum())


def zeta_trace_ratio(buffer: PairBuffer) -> float:
    """Trace ratio ``tr(Y^T Y) / (2 tr(Y^T S))``."""
    num = float(np.sum(buffer.Y * buffer.Y))
    den = float(np.sum(buffer.Y * buffer.S))
    if den == 0.0:
        raise ZeroCurvatureError("tr(Y^T S) is zero")
    return num / (2.0 * den)


def zeta_max_ratio(buffer: PairBuffer) -> float:
    """Largest BB ratio over the stored pairs."""
    return float(_pair_ratios(buffer).max())


def safeguard(candidate: float, previous: float) -> float:
    """Return the candidate if it lies in ``[1e-4, 1e4]``, else the previous
    value (which also absorbs non-finite candidates)."""
    if not np.isfinite(candidate):
        return previous
    if SAFEGUARD_LO <= candidate <= SAFEGUARD_HI:
        return float(candidate)
    return previous


def choose_params(option: InitOption, buffer: PairBuffer):
    """Compute (zeta, zetaC) for the configured option and safeguard both.

    The "newest pair" in the BB pieces is the most recent *stored* pair.  A
    failed ratio (zero denominator) is treated as an out-of-range candidate,
    i.e. the previous value is kept.  Updates the option's stored previous
    values and returns the safeguarded pair.
    """
    def _try(fn, *args):
        try:
            return fn(*args)
        except ZeroDivisionError:
            return np.nan

    s_new, y_new = buffer.newest()
    bb_new = _try(bb_ratio, s_new, y_new)
    if option.tag == "bb":
        zeta_c, zetaC_c = bb_new, bb_new
    elif option.tag == "sum":
        total = _try(zeta_sum_ratios, buffer)
        zeta_c, zetaC_c = total, total
    elif option.tag == "half-sum-bb":
        zeta_c, zetaC_c = 0.5 * _try(zeta_sum_ratios, buffer), bb_new
    else:  # max-bb
        zeta_c, zetaC_c = _try(zeta_max_ratio, buffer), bb_new
    zeta = safeguard(zeta_c, option.zeta_prev)
    zetaC = safeguard(zetaC_c, option.zetaC_prev)
    option.zeta_prev = zeta
    option.zetaC_prev = zetaC
    return zeta, zetaC
