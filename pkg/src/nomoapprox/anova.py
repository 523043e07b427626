"""Dimensionwise variance decomposition of polynomials on the unit cube.

Splits f into mutually orthogonal components f_S, one per subset S of
the variables, where f_S depends only on the variables in S.  Each
component is obtained by integrating out the complementary variables
and subtracting all lower-order components; the component variances
sum to the total variance of f when the decomposition is complete.

Everything here is computed from exact closed-form integrals of the
sparse polynomial representation; no sampling or quadrature is used
(quadrature lives in the test suite as an independent oracle).
"""

from __future__ import annotations

import itertools
import logging
import math
from dataclasses import dataclass

from .errors import DegenerateFunctionError, SubsetBudgetError
from .polynomial import MultiPoly, UniPoly

logger = logging.getLogger(__name__)

SubsetKey = tuple[int, ...]

# Full subset enumeration is exponential in K; these caps keep the cost
# of a requested decomposition bounded (binomial(20, 2) = 190 subsets,
# 2^12 = 4096 subsets).
MAX_VARS_ORDER2 = 20
MAX_VARS_FULL = 12

__all__ = [
    "AnovaResult",
    "anova_decompose",
    "superposition_ratio",
    "order_one_parts",
]


@dataclass(frozen=True)
class AnovaResult:
    """Decomposition of a polynomial up to a maximum interaction order.

    ``components`` and ``variances`` are keyed by sorted tuples of
    1-based variable indices; the empty subset's constant part is stored
    separately in ``mean`` (its variance is zero by construction).
    ``total_variance`` is computed independently of the per-subset
    variances, as E[f^2] - (E[f])^2.
    """

    num_vars: int
    mean: float
    components: dict[SubsetKey, MultiPoly]
    variances: dict[SubsetKey, float]
    total_variance: float
    max_order_computed: int

    def variance_up_to(self, d: int) -> float:
        """Sum of component variances over subsets of size at most d."""
        return math.fsum(v for s, v in self.variances.items() if len(s) <= d)

    def to_dict(self) -> dict:
        return {
            "num_vars": self.num_vars,
            "mean": self.mean,
            "max_order_computed": self.max_order_computed,
            "total_variance": self.total_variance,
            "variances": [
                {"subset": list(s), "variance": v}
                for s, v in sorted(self.variances.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
            "components": [
                {"subset": list(s), "poly": p.to_dict()}
                for s, p in sorted(self.components.items(), key=lambda kv: (len(kv[0]), kv[0]))
            ],
        }


def _check_budget(num_vars: int, max_order: int) -> None:
    if max_order >= 3 and num_vars > MAX_VARS_FULL:
        raise SubsetBudgetError(
            f"decomposition of order {max_order} for {num_vars} variables "
            f"exceeds the subset budget (limit {MAX_VARS_FULL} variables "
            f"beyond order 2)"
        )
    if max_order >= 2 and num_vars > MAX_VARS_ORDER2:
        raise SubsetBudgetError(
            f"order-2 decomposition limited to {MAX_VARS_ORDER2} variables, "
            f"got {num_vars}"
        )


def anova_decompose(f: MultiPoly, max_order: int) -> AnovaResult:
    """Decompose ``f`` into orthogonal components of order <= ``max_order``.

    Components are built by subset recursion in order of increasing
    subset size: the marginal of f onto S minus all strictly contained
    components.  Component variances are exact integrals of the squared
    components; tiny negative round-off is clamped to zero.

    Raises
    ------
    SubsetBudgetError
        If the subset count for the requested order is impractically large.
    ValueError
        If ``max_order`` is outside 1..num_vars.
    """
    K = f.num_vars
    if not 1 <= max_order <= K:
        raise ValueError(f"max_order must be in 1..{K}, got {max_order}")
    _check_budget(K, max_order)

    mean = f.integral()
    total_variance = (f * f).integral() - mean * mean
    clamp_tol = 1e-12 * max(1.0, abs(total_variance))
    if total_variance < 0.0:
        if total_variance < -clamp_tol:
            raise ArithmeticError(
                f"total variance {total_variance} is negative beyond round-off"
            )
        total_variance = 0.0

    mean_poly = MultiPoly.constant(K, mean)
    components: dict[SubsetKey, MultiPoly] = {}
    variances: dict[SubsetKey, float] = {}

    for size in range(1, max_order + 1):
        for subset in itertools.combinations(range(1, K + 1), size):
            f_s = f.marginal_onto(subset) - mean_poly
            for smaller in range(1, size):
                for sub in itertools.combinations(subset, smaller):
                    f_s = f_s - components[sub]
            var = (f_s * f_s).integral()
            if var < 0.0:
                if var < -clamp_tol:
                    raise ArithmeticError(
                        f"component variance {var} for subset {subset} is "
                        f"negative beyond round-off"
                    )
                logger.warning(
                    "clamping round-off-negative variance %.3e for subset %s",
                    var,
                    subset,
                )
                var = 0.0
            components[subset] = f_s
            variances[subset] = var

    return AnovaResult(
        num_vars=K,
        mean=mean,
        components=components,
        variances=variances,
        total_variance=total_variance,
        max_order_computed=max_order,
    )


def superposition_ratio(result: AnovaResult, d: int) -> float:
    """Fraction of the total variance carried by subsets of size <= d."""
    if d > result.max_order_computed:
        raise ValueError(
            f"ratio at order {d} requires a decomposition of at least that "
            f"order (have {result.max_order_computed})"
        )
    if result.total_variance <= 0.0:
        raise DegenerateFunctionError(
            "total variance is zero (constant function); ratio undefined"
        )
    return result.variance_up_to(d) / result.total_variance


def order_one_parts(result: AnovaResult) -> tuple[float, list[UniPoly]]:
    """The additive-model parts: the constant plus one univariate
    polynomial per variable (zero polynomial where a variable is absent)."""
    if result.max_order_computed < 1:
        raise ValueError("decomposition does not include order-1 components")
    inner = []
    for k in range(1, result.num_vars + 1):
        comp = result.components.get((k,))
        if comp is None:
            inner.append(UniPoly())
            continue
        coeffs: dict[int, float] = {}
        for exp, c in comp.sorted_terms():
            coeffs[exp[k - 1]] = c
        deg = max(coeffs) if coeffs else 0
        inner.append(UniPoly([coeffs.get(i, 0.0) for i in range(deg + 1)]))
    return result.mean, inner
