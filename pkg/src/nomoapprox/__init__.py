"""Nomographic approximation of multivariate polynomials on the unit cube.

The package finds approximations f(x) ~ psi(sum_k phi_k(x_k)) with a
monotone continuous outer function psi and continuous inner functions
phi_k, by maximizing the first-order variance fraction of a skewed
copy of f over a polyhedral cone of monotone polynomials, via a
semidefinite relaxation.
"""

from .anova import AnovaResult, anova_decompose, order_one_parts, superposition_ratio
from .bernstein import (
    ConeData,
    SkewPoly,
    bernstein_bounds,
    build_cone,
    in_cone,
    project_heuristic,
)
from .errors import (
    DegenerateFunctionError,
    InfeasibleError,
    NomoError,
    RangeViolationError,
    SubsetBudgetError,
)
from .pipeline import (
    ErrorReport,
    MonotoneTable,
    NomoApprox,
    approximate,
    error_report,
    evaluate,
    evaluate_grid,
    invert_outer,
)
from .polynomial import MultiPoly, UniPoly
from .quadforms import (
    EquilibratedForms,
    QuadForms,
    build_forms,
    equilibrate,
    rayleigh,
    sigma_k,
    sigma_total,
)
from .sdp import (
    ResidualReport,
    SdpProblem,
    SdpSolution,
    extract_top_eig,
    solve_sdr,
    verify_solution,
)

__version__ = "0.1.0"

__all__ = [
    "AnovaResult",
    "ConeData",
    "DegenerateFunctionError",
    "EquilibratedForms",
    "ErrorReport",
    "InfeasibleError",
    "MonotoneTable",
    "MultiPoly",
    "NomoApprox",
    "NomoError",
    "QuadForms",
    "RangeViolationError",
    "ResidualReport",
    "SdpProblem",
    "SdpSolution",
    "SkewPoly",
    "SubsetBudgetError",
    "UniPoly",
    "anova_decompose",
    "approximate",
    "bernstein_bounds",
    "build_cone",
    "build_forms",
    "equilibrate",
    "error_report",
    "evaluate",
    "evaluate_grid",
    "extract_top_eig",
    "in_cone",
    "invert_outer",
    "order_one_parts",
    "project_heuristic",
    "rayleigh",
    "sigma_k",
    "sigma_total",
    "solve_sdr",
    "superposition_ratio",
    "verify_solution",
]
