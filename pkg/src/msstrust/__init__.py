"""Limited-memory multipoint symmetric secant trust-region optimization.

The solver keeps a window of quasi-Newton pairs, relaxes the multiple
secant conditions through a symmetrization of S^T Y, and represents the
(possibly indefinite) curvature model in compact form over a dense
two-parameter initialization.  Trust-region subproblems are solved to high
accuracy from the model's implicit eigendecomposition; an L-SR1 baseline
with truncated CG and a performance-profile benchmark harness round out
the package.
"""

from .dense_kernels import LdltFactor, SymEig, gram, ldlt_pivoted, solve_upper_tri, sym_eig
from .driver import SolveReport, TrConfig, lsr1_solve, mss_solve, solve
from .init_params import InitOption, bb_ratio, choose_params, safeguard, \
    zeta_max_ratio, zeta_sum_ratios, zeta_trace_ratio
from .mss_core import CompactFactorization, PairBuffer, SpectralView, apply_B, \
    build_compact, cond_and_norm, empty_view, full_eigenvalues, \
    rank2_update_dense, spectral_view, sym_lower, try_accept_pair
from .problems import ProblemDef, fd_gradient_check, get_problem, problem_names, suite
from .tr_subproblem import SubproblemSolution, cauchy_fallback, secular_newton, \
    solve_obs, solve_steihaug_cg

__version__ = "0.1.0"

__all__ = [
    "LdltFactor", "SymEig", "gram", "ldlt_pivoted", "solve_upper_tri", "sym_eig",
    "SolveReport", "TrConfig", "lsr1_solve", "mss_solve", "solve",
    "InitOption", "bb_ratio", "choose_params", "safeguard",
    "zeta_max_ratio", "zeta_sum_ratios", "zeta_trace_ratio",
    "CompactFactorization", "PairBuffer", "SpectralView", "apply_B",
    "build_compact", "cond_and_norm", "empty_view", "full_eigenvalues",
    "rank2_update_dense", "spectral_view", "sym_lower", "try_accept_pair",
    "ProblemDef", "fd_gradient_check", "get_problem", "problem_names", "suite",
    "SubproblemSolution", "cauchy_fallback", "secular_newton", "solve_obs",
    "solve_steihaug_cg",
]
