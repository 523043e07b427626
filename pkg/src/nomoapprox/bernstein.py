"""Monotone-polynomial cone via Bernstein coefficients of the derivative.

A degree-D polynomial g(x) = sum_d z_d x^d + c is nondecreasing on
[0, 1] whenever the Bernstein coefficients of its derivative are all
nonnegative.  Those coefficients are a linear image M z of the
monomial coefficient vector, so {z : M z >= 0} is a polyhedral cone of
certifiably monotone polynomials.  The condition is sufficient, not
necessary: monotone polynomials with mixed-sign Bernstein derivative
coefficients exist outside the cone.

The same machinery yields range bounds: the values of a degree-(D-1)
polynomial on [0, 1] are enclosed by the min and max of its Bernstein
coefficients.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import solve_triangular

from .polynomial import UniPoly

__all__ = [
    "ConeData",
    "SkewPoly",
    "build_cone",
    "bernstein_bounds",
    "in_cone",
    "project_heuristic",
]

DEFAULT_CONE_TOL = 1e-9

# The positive-part projection is exact in the Bernstein coordinates;
# a couple of re-solves absorb the round-trip error of mapping back.
_PROJECTION_REPAIR_ITERS = 50


@dataclass(frozen=True)
class ConeData:
    """Basis-change matrices defining the monotonicity cone at degree D.

    ``m_tilde`` maps the monomial coefficients of a degree-(D-1)
    polynomial to its Bernstein coefficients (lower triangular, first
    column and last row all ones).  ``m = m_tilde @ diag(1..D)`` maps
    the coefficients z_1..z_D of a constant-free degree-D polynomial to
    the Bernstein coefficients of its derivative.
    """

    degree: int
    m_tilde: np.ndarray
    m: np.ndarray


@dataclass(frozen=True)
class SkewPoly:
    """A constant-free-coded polynomial g(x) = sum_d z_d x^d + c.

    When ``z`` lies in the monotonicity cone (minus the origin), g is
    nondecreasing and continuous on [0, 1].
    """

    z: np.ndarray
    c: float = 0.0

    def __post_init__(self):
        z = np.asarray(self.z, dtype=float).reshape(-1)
        z.flags.writeable = False
        object.__setattr__(self, "z", z)

    @property
    def degree(self) -> int:
        return self.z.size

    def poly(self) -> UniPoly:
        return UniPoly([self.c, *self.z])

    def __call__(self, x):
        return self.poly()(x)


def build_cone(degree: int) -> ConeData:
    """Construct the Bernstein matrices for a given polynomial degree.

    Entries are ratios of binomial coefficients, computed from exact
    integer binomials (all values fit in a double exactly for the
    degrees this package supports).
    """
    if degree < 1:
        raise ValueError("degree must be a positive integer")
    D = degree
    mt = np.zeros((D, D))
    for i in range(D):
        for j in range(i + 1):
            mt[i, j] = math.comb(i, j) / math.comb(D - 1, j)
    m = mt * np.arange(1, D + 1)
    mt.flags.writeable = False
    m.flags.writeable = False
    return ConeData(degree=D, m_tilde=mt, m=m)


def bernstein_bounds(cone: ConeData, coeffs) -> tuple[float, float]:
    """Enclosure of a degree-(D-1) polynomial on [0, 1].

    ``coeffs`` are the D monomial coefficients (constant term first).
    Returns (min, max) of the Bernstein coefficients, which sandwich
    every value the polynomial takes on the interval.
    """
    v = np.asarray(coeffs, dtype=float).reshape(-1)
    if v.size != cone.degree:
        raise ValueError(f"expected {cone.degree} coefficients, got {v.size}")
    b = cone.m_tilde @ v
    return float(b.min()), float(b.max())


def in_cone(cone: ConeData, z, tol: float = DEFAULT_CONE_TOL) -> bool:
    """Membership in the monotonicity cone minus the origin."""
    if tol < 0:
        raise ValueError("tolerance must be nonnegative")
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != cone.degree:
        raise ValueError(f"expected {cone.degree} coefficients, got {z.size}")
    if np.max(np.abs(z)) <= tol:
        return False
    return float((cone.m @ z).min()) >= -tol


def project_heuristic(cone: ConeData, v) -> list[np.ndarray]:
    """Cone-feasible candidates obtained by clipping in Bernstein space.

    For each sign s, the image s * M v is projected onto the positive
    orthant and mapped back through a triangular solve.  Candidates
    failing the membership test (e.g. the zero vector when M v has a
    single sign) are dropped, so the list has 0, 1 or 2 entries.
    The returned vectors satisfy ``M z >= 0`` under recomputation: a
    short repair loop re-solves with the clipped residual until the
    round-trip is exactly nonnegative.
    """
    v = np.asarray(v, dtype=float).reshape(-1)
    if v.size != cone.degree:
        raise ValueError(f"expected {cone.degree} coefficients, got {v.size}")
    mv = cone.m @ v
    candidates = []
    for sign in (1.0, -1.0):
        w = np.maximum(sign * mv, 0.0)
        z = solve_triangular(cone.m, w, lower=True)
        for _ in range(_PROJECTION_REPAIR_ITERS):
            r = cone.m @ z
            if r.min() >= 0.0:
                break
            z = solve_triangular(cone.m, np.maximum(r, 0.0), lower=True)
        if in_cone(cone, z, tol=0.0):
            candidates.append(z)
    return candidates
