"""Shared fixtures and independent oracles.

The quadrature helpers implement tensor Gauss-Legendre integration on
the unit cube; they are the brute-force cross-check for every
closed-form moment in the package and deliberately share no code with
the library's integration routines.
"""

import time

import numpy as np
import pytest
from numpy.polynomial.legendre import leggauss

from nomoapprox import MultiPoly, approximate, error_report


def gl01(n: int):
    """Gauss-Legendre nodes and weights on [0, 1]."""
    x, w = leggauss(n)
    return 0.5 * (x + 1.0), 0.5 * w


def gl_integrate_2d(func, n: int) -> float:
    """Tensor Gauss-Legendre integral of func(X1, X2) over the unit square."""
    x, w = gl01(n)
    X1, X2 = np.meshgrid(x, x, indexing="ij")
    return float(np.sum(np.outer(w, w) * func(X1, X2)))


def reference_poly() -> MultiPoly:
    """The two-variable benchmark (x1 + x1 x2 + x2)^2 / 9."""
    x1 = MultiPoly.variable(2, 1)
    x2 = MultiPoly.variable(2, 2)
    return (1.0 / 9.0) * (x1 + x1 * x2 + x2) ** 2


def reference_callable(X1, X2):
    return (X1 + X1 * X2 + X2) ** 2 / 9.0


@pytest.fixture(scope="session")
def f_ref() -> MultiPoly:
    return reference_poly()


@pytest.fixture(scope="session")
def na20(f_ref):
    """Full pipeline run at degree 20, shared across modules (expensive)."""
    t0 = time.perf_counter()
    na = approximate(f_ref, 20)
    elapsed = time.perf_counter() - t0
    return na, elapsed


@pytest.fixture(scope="session")
def sweep_rows(f_ref, na20):
    """(degree, sdr objective, feasible ratio, sup error) over the
    benchmark degrees; the degree-20 entry reuses the shared run."""
    rows = []
    for d in (5, 10, 15):
        na = approximate(f_ref, d)
        err = error_report(na, f_ref, 101)
        rows.append((d, na.sdr_objective, na.ratio, err.sup_err))
    na, _ = na20
    err = error_report(na, f_ref, 101)
    rows.append((20, na.sdr_objective, na.ratio, err.sup_err))
    return rows
