"""End-to-end construction of monotone-outer additive approximations.

Given a polynomial f on the unit cube with values in [0, 1] and a skew
degree D, the pipeline

  1. assembles the variance quadratic forms and the monotonicity cone,
  2. solves the semidefinite relaxation of the cone-constrained
     Rayleigh-quotient problem (after diagonal equilibration),
  3. recovers a cone-feasible coefficient vector from the top eigenpair
     (directly when a sign of the scaled eigenvector is feasible,
     otherwise through the clipped-Bernstein projection), refines each
     candidate by a projected-gradient ascent of the Rayleigh quotient
     inside the cone, and picks the candidate with the largest
     quotient (quotients tied at evaluation precision are separated by
     measured sup error),
  4. decomposes the skewed function g(f(x)) into its additive parts,
     which become the inner functions, and
  5. tabulates and inverts g numerically, which becomes the outer
     function.

The achieved quality is reported as the Rayleigh quotient of the chosen
vector itself, never the relaxation bound.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy.linalg import solve_triangular

from .anova import AnovaResult, anova_decompose, order_one_parts
from .bernstein import ConeData, SkewPoly, build_cone, in_cone, project_heuristic
from .errors import DegenerateFunctionError, InfeasibleError
from .polynomial import MultiPoly, UniPoly
from .quadforms import QuadForms, build_forms, equilibrate, rayleigh
from .sdp import SdpProblem, SdpSolution, extract_top_eig, solve_sdr

__all__ = [
    "MonotoneTable",
    "NomoApprox",
    "ErrorReport",
    "approximate",
    "invert_outer",
    "evaluate",
    "evaluate_grid",
    "error_report",
]

MAX_DEGREE = 32
DEFAULT_GRID_SIZE = 4097
_ERROR_GRID_BUDGET = 10**7
_BISECT_MAX_ITERS = 64
# Quotients closer than this are indistinguishable at the evaluation's
# round-off on ill-conditioned instances; such ties are broken by the
# measured sup error of the assembled approximation.
_RATIO_TIE_WINDOW = 1e-4
_TIE_BREAK_LATTICE_BUDGET = 200_000


@dataclass(frozen=True)
class MonotoneTable:
    """Tabulated nondecreasing function with numerical inversion.

    ``xs`` are strictly increasing abscissae spanning [0, 1]; ``ys`` the
    nondecreasing tabulated values.  Calling the table answers inverse
    queries y -> x: the table brackets the preimage and a bisection on
    the underlying function (when available, else linear interpolation)
    refines it to ``refine_tol`` in y.  Values inside a flat segment map
    to its left endpoint; queries outside the range are clamped.
    """

    xs: np.ndarray
    ys: np.ndarray
    refine_tol: float
    flat_tol: float
    fn: object = None  # optional callable for refinement

    def __post_init__(self):
        for arr in (self.xs, self.ys):
            arr.flags.writeable = False

    @property
    def y_range(self) -> tuple[float, float]:
        return float(self.ys[0]), float(self.ys[-1])

    def __call__(self, y):
        scalar = np.isscalar(y) or np.ndim(y) == 0
        yq = np.clip(np.atleast_1d(np.asarray(y, dtype=float)), self.ys[0], self.ys[-1])
        n = self.xs.size
        i = np.clip(np.searchsorted(self.ys, yq, side="left"), 0, n - 1)
        lo_idx = np.maximum(i - 1, 0)
        xlo, xhi = self.xs[lo_idx], self.xs[i]
        ylo, yhi = self.ys[lo_idx], self.ys[i]

        out = np.empty_like(yq)
        exact_left = i == 0
        # bit-exact hits on a tabulated value resolve to its abscissa
        # (for a flat run, searchsorted-left lands on its left node)
        exact_hit = yhi == yq
        flat = (yhi - ylo) <= self.flat_tol
        done = exact_left | exact_hit | flat
        out[exact_left] = self.xs[0]
        out[exact_hit & ~exact_left] = self.xs[i][exact_hit & ~exact_left]
        out[flat & ~exact_left & ~exact_hit] = xlo[flat & ~exact_left & ~exact_hit]

        active = ~done
        if np.any(active):
            if self.fn is None:
                t = (yq[active] - ylo[active]) / (yhi[active] - ylo[active])
                out[active] = xlo[active] + t * (xhi[active] - xlo[active])
            else:
                a = xlo[active].copy()
                b = xhi[active].copy()
                target = yq[active]
                for _ in range(_BISECT_MAX_ITERS):
                    mid = 0.5 * (a + b)
                    below = self.fn(mid) < target
                    a = np.where(below, mid, a)
                    b = np.where(below, b, mid)
                    if float(np.max(b - a)) < 1e-16:
                        break
                out[active] = 0.5 * (a + b)
        if scalar:
            return float(out[0])
        return out.reshape(np.shape(y))


@dataclass(frozen=True)
class NomoApprox:
    """The assembled approximation f(x) ~ outer(mean + sum_k inner_k(x_k)).

    ``ratio`` is the Rayleigh quotient of the chosen skew vector (the
    first-order variance fraction of the skewed function); ``epsilon``
    is 1 - ratio.  ``domain_prime`` is the range [g(0), g(1)] of the
    skew, into which the inner sum is clamped before inversion.
    """

    inner: tuple[UniPoly, ...]
    mean: float
    skew: SkewPoly
    outer: MonotoneTable
    ratio: float
    epsilon: float
    domain_prime: tuple[float, float]
    composition_anova: AnovaResult
    sdr_objective: float
    solver: SdpSolution
    forms: QuadForms
    cone: ConeData
    candidate_source: str
    timings: dict = field(default_factory=dict)

    @property
    def num_vars(self) -> int:
        return len(self.inner)

    def __call__(self, x):
        return evaluate(self, x)

    def distribute_mean(self) -> "NomoApprox":
        """Equivalent parameterization with the constant folded into the
        inner functions (mean/K added to each)."""
        share = self.mean / self.num_vars
        inner = tuple(p + share for p in self.inner)
        return NomoApprox(
            inner=inner,
            mean=0.0,
            skew=self.skew,
            outer=self.outer,
            ratio=self.ratio,
            epsilon=self.epsilon,
            domain_prime=self.domain_prime,
            composition_anova=self.composition_anova,
            sdr_objective=self.sdr_objective,
            solver=self.solver,
            forms=self.forms,
            cone=self.cone,
            candidate_source=self.candidate_source,
            timings=self.timings,
        )

    def to_dict(self, include_timings: bool = True) -> dict:
        data = {
            "num_vars": self.num_vars,
            "skew": {"z": self.skew.z.tolist(), "c": self.skew.c},
            "inner": [list(p.coeffs) for p in self.inner],
            "mean": self.mean,
            "psi_table": {"xs": self.outer.xs.tolist(), "ys": self.outer.ys.tolist()},
            "ratio": self.ratio,
            "epsilon": self.epsilon,
            "domain_prime": list(self.domain_prime),
            "sdr_objective": self.sdr_objective,
            "solver": {
                "status": self.solver.status,
                "iterations": self.solver.iterations,
                "residuals": list(self.solver.residuals),
                "rank_est": self.solver.rank_est,
                "top_eigval": self.solver.top_eigval,
            },
            "candidate_source": self.candidate_source,
            "variances": {
                "per_variable": [
                    self.composition_anova.variances.get((k,), 0.0)
                    for k in range(1, self.num_vars + 1)
                ],
                "total": self.composition_anova.total_variance,
            },
        }
        if include_timings:
            data["timings"] = dict(self.timings)
        return data


@dataclass(frozen=True)
class ErrorReport:
    """Pointwise approximation error on a uniform lattice."""

    sup_err: float
    rms_err: float
    axes: tuple[np.ndarray, ...]
    f_grid: np.ndarray
    approx_grid: np.ndarray
    err_grid: np.ndarray


def _cone_ascent(at: np.ndarray, bt: np.ndarray, w0: np.ndarray, max_iters: int = 50_000):
    """Projected-gradient ascent of (w'at w)/(w'bt w) over {w >= 0}.

    Monotone in the quotient with a halving/expanding step, so the
    iterate never leaves the orthant and never gets worse.  Used to
    refine relaxation candidates: the float64 relaxation systematically
    undershoots the attainable quotient on the ill-conditioned
    high-degree instances, and this local step recovers the gap.
    """
    w = np.maximum(np.asarray(w0, dtype=float), 0.0)
    nrm = float(np.linalg.norm(w))
    if nrm == 0.0:
        return w
    w = w / nrm

    def quotient(v):
        den = float(v @ (bt @ v))
        return float(v @ (at @ v)) / den if den > 0.0 else -math.inf

    r = quotient(w)
    if not math.isfinite(r):
        return w
    # step-size restarts pull the iterate out of zig-zag stalls on the
    # orthant boundary
    for restart in range(4):
        r_at_restart = r
        step = 1.0
        for _ in range(max_iters):
            bw = bt @ w
            aw = at @ w
            den = float(w @ bw)
            if den <= 0.0:
                break
            grad = 2.0 * (aw - r * bw) / den
            w_new = np.maximum(w + step * grad, 0.0)
            nrm = float(np.linalg.norm(w_new))
            if nrm > 0.0:
                w_new /= nrm
                r_new = quotient(w_new)
                if r_new > r:
                    w, r = w_new, r_new
                    step *= 1.2
                    continue
            step *= 0.5
            if step < 1e-18:
                break
        if restart > 0 and r <= r_at_restart + 1e-15:
            break
    return w


def _refine_candidates(qf: QuadForms, cone: ConeData, candidates, cone_tol: float):
    """Ascend each candidate inside the cone; candidates whose refinement
    leaves the cone even after the round-trip repair fall back to their
    original vectors."""
    m_inv = solve_triangular(cone.m, np.eye(cone.degree), lower=True)
    at = m_inv.T @ qf.a_sum @ m_inv
    bt = m_inv.T @ qf.b_mat @ m_inv
    at = 0.5 * (at + at.T)
    bt = 0.5 * (bt + bt.T)
    refined = []
    for z0 in candidates:
        w = _cone_ascent(at, bt, cone.m @ z0)
        z = solve_triangular(cone.m, w, lower=True)
        for _ in range(50):
            r = cone.m @ z
            if r.min() >= 0.0:
                break
            z = solve_triangular(cone.m, np.maximum(r, 0.0), lower=True)
        refined.append(z if in_cone(cone, z, cone_tol) else z0)
    return refined


def _assemble_parts(f: MultiPoly, z: np.ndarray, grid_size: int):
    """Build skew, additive decomposition and inverted outer for a skew
    coefficient vector."""
    skew = SkewPoly(z=z, c=0.0)
    comp_anova = anova_decompose(skew.poly().compose(f), 1)
    mean, inner = order_one_parts(comp_anova)
    outer = invert_outer(skew, grid_size)
    return skew, comp_anova, mean, tuple(inner), outer


def _sup_on_lattice(f: MultiPoly, mean, inner, outer, n: int) -> float:
    axes = [np.linspace(0.0, 1.0, n)] * f.num_vars
    shape = tuple(a.size for a in axes)
    s = np.full(shape, mean)
    for k, ax in enumerate(axes):
        idx = [None] * f.num_vars
        idx[k] = slice(None)
        s = s + inner[k](ax)[tuple(idx)]
    approx = outer(np.clip(s, outer.ys[0], outer.ys[-1]))
    return float(np.max(np.abs(f.eval_grid(axes) - approx)))


def invert_outer(skew: SkewPoly, grid_size: int = DEFAULT_GRID_SIZE) -> MonotoneTable:
    """Tabulate the skew on a uniform grid and wrap it for inversion.

    Round-off wiggles below 1e-12 of the range are flattened by a
    running maximum; any genuine decrease raises, as does a skew whose
    total rise is below 1e-12 (inversion impossible).
    """
    if grid_size < 2:
        raise ValueError("grid_size must be at least 2")
    g = skew.poly()
    rise = g(1.0) - g(0.0)
    if rise < 1e-12:
        raise DegenerateFunctionError(
            f"skew rises by only {rise:.3e} over [0, 1]; cannot invert"
        )
    xs = np.linspace(0.0, 1.0, grid_size)
    ys = g(xs)
    dy = np.diff(ys)
    wiggle_tol = 1e-12 * max(1.0, abs(rise))
    if float(dy.min()) < -wiggle_tol:
        raise ValueError(
            f"skew is not nondecreasing on [0, 1] (drop {float(dy.min()):.3e})"
        )
    ys = np.maximum.accumulate(ys)
    return MonotoneTable(
        xs=xs,
        ys=ys,
        refine_tol=1e-10 * rise,
        flat_tol=1e-12 * max(1.0, abs(rise)),
        fn=g,
    )


def approximate(
    f: MultiPoly,
    degree: int,
    *,
    delta: float = 1.0,
    grid_size: int = DEFAULT_GRID_SIZE,
    tol_feas: float = 1e-7,
    tol_gap: float = 1e-6,
    max_iter: int = 500_000,
    cone_tol: float = 1e-9,
    refine: bool = True,
) -> NomoApprox:
    """Run the full pipeline for a skew of the given degree.

    Raises
    ------
    RangeViolationError
        If f does not map the unit cube into [0, 1].
    DegenerateFunctionError
        If f has zero variance (nothing to approximate).
    InfeasibleError
        If no cone-feasible skew could be recovered; the relaxation
        bound is included in the message as the unattained target.
    """
    if not 1 <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be in 1..{MAX_DEGREE}, got {degree}")
    timings: dict[str, float] = {}

    t0 = time.perf_counter()
    qf = build_forms(f, degree)
    cone = build_cone(degree)
    timings["build_forms_s"] = time.perf_counter() - t0

    if qf.b_norm <= 1e-13 * max(1.0, float(np.abs(qf.b1).max())):
        raise DegenerateFunctionError("f has zero variance; nothing to skew")

    t0 = time.perf_counter()
    eq = equilibrate(qf, cone)
    problem = SdpProblem(
        a=eq.a_hat,
        b=eq.b_hat,
        m=eq.m_hat,
        delta=delta,
        tol_feas=tol_feas,
        tol_gap=tol_gap,
        max_iter=max_iter,
    )
    sol = solve_sdr(problem)
    timings["solve_sdr_s"] = time.perf_counter() - t0
    if sol.status == "infeasible":
        raise InfeasibleError("the relaxation is infeasible (B has no positive part)")
    sdr_objective = sol.objective / delta

    t0 = time.perf_counter()
    lam, q = extract_top_eig(sol)
    v = eq.scale * (math.sqrt(max(lam, 0.0)) * q)
    # The quotient and cone membership are scale-free; a unit-norm
    # candidate keeps the absolute cone tolerance meaningful (the raw
    # eigenvector scales like sqrt(lambda_1), which is enormous on
    # high-degree instances).
    v_norm = float(np.linalg.norm(v))
    if v_norm > 0.0:
        v = v / v_norm
    eig_feasible = [(w, "eigenvector") for w in (v, -v) if in_cone(cone, w, cone_tol)]
    if eig_feasible:
        pool = list(eig_feasible)
    else:
        pool = [(w, "projection") for w in project_heuristic(cone, v)]
    if refine and pool:
        # the projections of both eigenvector signs are free additional
        # starting points for the refinement
        extra = [
            (w, "projection")
            for w in project_heuristic(cone, v)
            if not any(np.array_equal(w, u) for u, _ in pool)
        ]
        starts = pool + extra
        refined = _refine_candidates(qf, cone, [w for w, _ in starts], cone_tol)
        pool = [(w, lab) for w, (_, lab) in zip(refined, starts)]

    scored = []
    for w, label in pool:
        try:
            quotient = rayleigh(qf, w)
        except DegenerateFunctionError:
            continue
        scored.append((quotient, w, label))
    if not scored:
        raise InfeasibleError(
            "no cone-feasible skew candidate; the relaxation bound "
            f"{sdr_objective:.6g} is unattained"
        )
    best_quotient = max(q for q, _, _ in scored)
    finalists = [
        (q, w, lab) for q, w, lab in scored if q >= best_quotient - _RATIO_TIE_WINDOW
    ]
    finalists.sort(key=lambda t: (-t[0], tuple(t[1])))
    timings["extract_s"] = time.perf_counter() - t0

    t0 = time.perf_counter()
    if len(finalists) > 1:
        # quotient tie at evaluation precision: break by sup error on a
        # coarse lattice
        n = 41
        while n**f.num_vars > _TIE_BREAK_LATTICE_BUDGET and n > 5:
            n = (n + 1) // 2
        best = None
        for q, w, lab in finalists:
            parts = _assemble_parts(f, w, grid_size)
            sup = _sup_on_lattice(f, parts[2], parts[3], parts[4], n)
            if best is None or sup < best[0]:
                best = (sup, q, w, lab, parts)
        _, ratio, best_z, source, parts = best
    else:
        ratio, best_z, source = finalists[0]
        parts = _assemble_parts(f, best_z, grid_size)
    skew, comp_anova, mean, inner, outer = parts
    timings["assemble_s"] = time.perf_counter() - t0

    return NomoApprox(
        inner=inner,
        mean=mean,
        skew=skew,
        outer=outer,
        ratio=ratio,
        epsilon=1.0 - ratio,
        domain_prime=outer.y_range,
        composition_anova=comp_anova,
        sdr_objective=sdr_objective,
        solver=sol,
        forms=qf,
        cone=cone,
        candidate_source=source,
        timings=timings,
    )


def evaluate(na: NomoApprox, x) -> float:
    """Evaluate the approximation at a point of the unit cube."""
    if len(x) != na.num_vars:
        raise ValueError(
            f"point has {len(x)} coordinates, expected {na.num_vars}"
        )
    s = na.mean + math.fsum(p(float(v)) for p, v in zip(na.inner, x))
    lo, hi = na.domain_prime
    return float(na.outer(min(max(s, lo), hi)))


def evaluate_grid(na: NomoApprox, axes) -> np.ndarray:
    """Evaluate the approximation on a tensor grid of 1-D axes."""
    if len(axes) != na.num_vars:
        raise ValueError("one coordinate axis required per variable")
    axes = [np.asarray(a, dtype=float) for a in axes]
    shape = tuple(a.size for a in axes)
    s = np.full(shape, na.mean)
    for k, ax in enumerate(axes):
        idx = [None] * na.num_vars
        idx[k] = slice(None)
        s = s + na.inner[k](ax)[tuple(idx)]
    lo, hi = na.domain_prime
    return na.outer(np.clip(s, lo, hi))


def error_report(na: NomoApprox, f: MultiPoly, grid_n: int) -> ErrorReport:
    """Pointwise error f - approximation on a grid_n^K lattice
    (corners included)."""
    if grid_n < 2:
        raise ValueError("grid_n must be at least 2")
    K = f.num_vars
    if grid_n**K > _ERROR_GRID_BUDGET:
        raise ValueError(
            f"error grid of {grid_n}^{K} points exceeds the budget of "
            f"{_ERROR_GRID_BUDGET}"
        )
    axes = tuple(np.linspace(0.0, 1.0, grid_n) for _ in range(K))
    f_grid = f.eval_grid(axes)
    a_grid = evaluate_grid(na, axes)
    err = f_grid - a_grid
    return ErrorReport(
        sup_err=float(np.max(np.abs(err))),
        rms_err=float(np.sqrt(np.mean(err * err))),
        axes=axes,
        f_grid=f_grid,
        approx_grid=a_grid,
        err_grid=err,
    )
