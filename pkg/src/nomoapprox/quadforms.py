"""Variance quadratic forms built from unit-cube moments.

For a polynomial f mapping [0,1]^K into [0,1] and a constant-free skew
g(t) = sum_d z_d t^d, the variance of g(f(x)) and its per-variable
first-order variances are quadratic forms in z:

    var(g o f)   = z' B z,      B   = B1 - b2 b2'
    var_k(g o f) = z' A_k z,    A_k = A1(k) - b2 b2'

where B1[i,j] is the moment of f^(i+j) (a Hankel matrix), b2[i] the
moment of f^i, and A1(k)[i,j] the cross integral over x_k of the
marginals of f^i and f^j.  The additive constant of g never enters.

All entries come from exact closed-form integration of sparse
polynomial powers.  The moment matrices are Hankel-like and severely
ill-conditioned at high degree, so a diagonal congruence scaling by
inverse square roots of the even moments is provided for use ahead of
any optimization over these forms.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from .bernstein import ConeData
from .errors import DegenerateFunctionError, RangeViolationError
from .polynomial import MultiPoly

__all__ = [
    "QuadForms",
    "EquilibratedForms",
    "build_forms",
    "sigma_total",
    "sigma_k",
    "rayleigh",
    "equilibrate",
]

RANGE_TOL = 1e-9
_GRID_POINTS_PER_AXIS = 51
_MAX_EXACT_CORNERS = 16


@dataclass(frozen=True)
class QuadForms:
    """Moment matrices of f up to skew degree D.

    ``a1``/``a_k`` hold one matrix per variable (index k-1 for variable
    x_k).  ``scale`` is the diagonal equilibration vector
    1/sqrt(moment of f^(2d)).  All arrays are read-only.
    """

    degree: int
    num_vars: int
    moments: tuple[float, ...]  # moments[d] = integral of f^d, d = 0..2D
    b1: np.ndarray
    b2: np.ndarray
    a1: tuple[np.ndarray, ...]
    b_mat: np.ndarray
    a_k: tuple[np.ndarray, ...]
    a_sum: np.ndarray
    scale: np.ndarray
    b_norm: float


@dataclass(frozen=True)
class EquilibratedForms:
    """Congruence-scaled copies (S B S, S A S, M S) of the forms.

    Rayleigh quotients are invariant: a vector zh for the scaled pair
    corresponds to z = scale * zh for the original one, and the cone
    test M z >= 0 becomes m_hat zh >= 0.
    """

    b_hat: np.ndarray
    a_hat: np.ndarray
    m_hat: np.ndarray
    scale: np.ndarray


def _bernstein_box_bounds(f: MultiPoly) -> tuple[float, float]:
    """Range enclosure of f on the unit square/interval via tensor
    Bernstein coefficients (K <= 2 only)."""
    degs = f.degree_per_var
    if f.num_vars == 1:
        n = degs[0]
        coeffs = np.zeros(n + 1)
        for exp, c in f.terms.items():
            coeffs[exp[0]] = c
        t = np.zeros((n + 1, n + 1))
        for i in range(n + 1):
            for l in range(i + 1):
                t[i, l] = math.comb(i, l) / math.comb(n, l)
        b = t @ coeffs
        return float(b.min()), float(b.max())
    n1, n2 = degs
    coeffs = np.zeros((n1 + 1, n2 + 1))
    for exp, c in f.terms.items():
        coeffs[exp[0], exp[1]] = c
    t1 = np.zeros((n1 + 1, n1 + 1))
    for i in range(n1 + 1):
        for l in range(i + 1):
            t1[i, l] = math.comb(i, l) / math.comb(n1, l)
    t2 = np.zeros((n2 + 1, n2 + 1))
    for i in range(n2 + 1):
        for l in range(i + 1):
            t2[i, l] = math.comb(i, l) / math.comb(n2, l)
    b = t1 @ coeffs @ t2.T
    return float(b.min()), float(b.max())


def _check_unit_range(f: MultiPoly) -> None:
    """Reject f unless its sampled values stay within [-tol, 1+tol].

    Cube corners are checked exactly; for K <= 2 a Bernstein coefficient
    enclosure can certify the range without sampling; otherwise a dense
    grid (K <= 3) or a deterministic low-discrepancy set decides.
    """
    K = f.num_vars
    if K <= _MAX_EXACT_CORNERS:
        for corner in itertools.product((0.0, 1.0), repeat=K):
            val = f(corner)
            if not -RANGE_TOL <= val <= 1.0 + RANGE_TOL:
                raise RangeViolationError(
                    f"f({corner}) = {val:.6g} lies outside [0, 1]"
                )
    if K <= 2:
        lo, hi = _bernstein_box_bounds(f)
        if lo >= -RANGE_TOL and hi <= 1.0 + RANGE_TOL:
            return  # certified without sampling
    if K <= 3:
        axes = [np.linspace(0.0, 1.0, _GRID_POINTS_PER_AXIS)] * K
        values = f.eval_grid(axes)
    else:
        from scipy.stats import qmc

        sampler = qmc.Sobol(d=K, scramble=False)
        pts = sampler.random_base2(m=17)  # 2^17 ~ 51^3 points
        values = np.array([f(p) for p in pts])
    vmin = float(values.min())
    vmax = float(values.max())
    if vmin < -RANGE_TOL or vmax > 1.0 + RANGE_TOL:
        raise RangeViolationError(
            f"f leaves [0, 1] on the unit cube: sampled range "
            f"[{vmin:.6g}, {vmax:.6g}]"
        )


def build_forms(f: MultiPoly, degree: int) -> QuadForms:
    """Assemble the variance quadratic forms of f for skews up to ``degree``.

    Raises
    ------
    RangeViolationError
        If f does not map the unit cube into [0, 1] (sampled check).
    """
    if degree < 1:
        raise ValueError("degree must be a positive integer")
    _check_unit_range(f)
    D = degree
    K = f.num_vars

    fpow: list[MultiPoly | None] = [None] * (2 * D + 1)
    p = MultiPoly.constant(K, 1.0)
    moments = [1.0]
    for d in range(1, 2 * D + 1):
        p = p * f
        fpow[d] = p
        moments.append(p.integral())

    b1 = np.empty((D, D))
    for i in range(D):
        for j in range(D):
            b1[i, j] = moments[i + j + 2]
    b2 = np.array(moments[1 : D + 1])

    a1 = []
    for k in range(1, K + 1):
        margs = [fpow[i].marginal(k) for i in range(1, D + 1)]
        mat = np.empty((D, D))
        for i in range(D):
            for j in range(i + 1):
                mat[i, j] = mat[j, i] = (margs[i] * margs[j]).integral01()
        a1.append(mat)

    outer = np.outer(b2, b2)
    b_mat = b1 - outer
    a_k = tuple((m - outer) for m in a1)
    a_sum = np.zeros((D, D))
    for m in a_k:
        a_sum += m

    scale = np.array([(max(moments[2 * d], 1e-300)) ** -0.5 for d in range(1, D + 1)])
    b_norm = float(np.linalg.norm(b_mat, 2))

    for arr in (b1, b2, b_mat, a_sum, scale, *a1, *a_k):
        arr.flags.writeable = False

    return QuadForms(
        degree=D,
        num_vars=K,
        moments=tuple(moments),
        b1=b1,
        b2=b2,
        a1=tuple(a1),
        b_mat=b_mat,
        a_k=a_k,
        a_sum=a_sum,
        scale=scale,
        b_norm=b_norm,
    )


def _quad(mat: np.ndarray, z: np.ndarray) -> float:
    return float(z @ (mat @ z))


def _roundoff_scale(mat: np.ndarray, z: np.ndarray) -> float:
    az = np.abs(z)
    return float(az @ (np.abs(mat) @ az))


def _check_len(qf: QuadForms, z) -> np.ndarray:
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != qf.degree:
        raise ValueError(f"expected {qf.degree} coefficients, got {z.size}")
    return z


def sigma_total(qf: QuadForms, z) -> float:
    """Variance of the skewed function, z' B z, clamped at zero when the
    raw value is negative within accumulation round-off."""
    z = _check_len(qf, z)
    val = _quad(qf.b_mat, z)
    if val < 0.0 and val >= -1e-12 * max(1.0, _roundoff_scale(qf.b_mat, z)):
        return 0.0
    return val


def sigma_k(qf: QuadForms, k: int, z) -> float:
    """First-order variance in x_k of the skewed function, z' A_k z."""
    if not 1 <= k <= qf.num_vars:
        raise IndexError(f"variable index {k} out of range 1..{qf.num_vars}")
    z = _check_len(qf, z)
    val = _quad(qf.a_k[k - 1], z)
    if val < 0.0 and val >= -1e-12 * max(1.0, _roundoff_scale(qf.a_k[k - 1], z)):
        return 0.0
    return val


def rayleigh(qf: QuadForms, z) -> float:
    """The first-order variance fraction z'Az / z'Bz of the skew z.

    Degenerate directions are those whose variance is indistinguishable
    from zero at the round-off floor of the quadratic-form evaluation
    (on high-degree instances the legitimate maximizer itself has
    z'Bz many orders below ||B|| ||z||^2, so the guard is referenced to
    accumulation error, not to the matrix norm).
    """
    z = _check_len(qf, z)
    den = _quad(qf.b_mat, z)
    floor = 4.0 * np.finfo(float).eps * _roundoff_scale(qf.b_mat, z)
    if den <= floor:
        raise DegenerateFunctionError(
            "skewed function has (numerically) zero variance along z"
        )
    return _quad(qf.a_sum, z) / den


def equilibrate(qf: QuadForms, cone: ConeData) -> EquilibratedForms:
    """Diagonal congruence scaling tied to the even moments of f.

    With S = diag(scale), returns (S B S, S A S, M S); the scaled pair
    has the B1-part diagonal equal to one, which tames the Hankel-type
    ill-conditioning before any numerical optimization.
    """
    if cone.degree != qf.degree:
        raise ValueError("cone degree does not match the quadratic forms")
    if min(qf.moments[2::2]) <= 0.0:
        raise DegenerateFunctionError(
            "an even moment of f is zero (f vanishes almost everywhere)"
        )
    s = qf.scale
    b_hat = s[:, None] * qf.b_mat * s[None, :]
    a_hat = s[:, None] * qf.a_sum * s[None, :]
    m_hat = cone.m * s[None, :]
    for arr in (b_hat, a_hat, m_hat):
        arr.flags.writeable = False
    return EquilibratedForms(b_hat=b_hat, a_hat=a_hat, m_hat=m_hat, scale=s)
