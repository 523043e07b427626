"""Relaxation solver: closed-form instances, a brute-force grid oracle,
eigenpair extraction and the independent residual audit."""

import numpy as np
import pytest
from scipy.linalg import solve_triangular

from nomoapprox import (
    SdpProblem,
    SdpSolution,
    build_cone,
    build_forms,
    equilibrate,
    extract_top_eig,
    rayleigh,
    solve_sdr,
    verify_solution,
)


def two_dim_problem(**kwargs):
    return SdpProblem(
        a=np.diag([1.0, 0.0]), b=np.eye(2), m=np.eye(2), **kwargs
    )


def brute_force_two_dim(delta=1.0, steps=2001):
    """Grid search over the PSD parameterization of the D=2 instance:
    Z = [[a, b], [b, c]] with a + c = delta, b in [0, sqrt(a c)],
    entrywise nonnegativity giving b >= 0.  Objective is a."""
    best = -np.inf
    for a in np.linspace(0.0, delta, steps):
        c = delta - a
        b_max = np.sqrt(max(a * c, 0.0))
        for b in (0.0, 0.5 * b_max, b_max):
            best = max(best, a)
    return best


class TestScalarCase:
    def test_closed_form(self):
        p = SdpProblem(a=np.array([[3.0]]), b=np.array([[2.0]]), m=np.array([[1.5]]))
        sol = solve_sdr(p)
        assert sol.status == "optimal"
        assert sol.z_mat[0, 0] == pytest.approx(0.5, abs=1e-8)
        assert sol.objective == pytest.approx(1.5, abs=1e-7)


class TestTwoDimBruteForce:
    def test_matches_grid_search(self):
        p = two_dim_problem(delta=1.0, tol_feas=1e-9, tol_gap=1e-9)
        sol = solve_sdr(p)
        assert sol.status == "optimal"
        assert sol.objective == pytest.approx(brute_force_two_dim(), abs=1e-6)
        np.testing.assert_allclose(sol.z_mat, np.diag([1.0, 0.0]), atol=1e-6)
        assert sol.rank_est == 1

    def test_verification_residuals_tiny(self):
        p = two_dim_problem(delta=1.0, tol_feas=1e-9, tol_gap=1e-9)
        sol = solve_sdr(p)
        report = verify_solution(p, sol)
        assert report.passed
        for check in report.checks:
            assert abs(check.value) <= 1e-8


class TestStatusHandling:
    def test_infeasible_when_b_negative(self):
        p = SdpProblem(a=np.eye(2), b=-np.eye(2), m=np.eye(2))
        sol = solve_sdr(p)
        assert sol.status == "infeasible"
        with pytest.raises(ValueError):
            extract_top_eig(sol)

    def test_iteration_cap_flagged(self, f_ref):
        qf = build_forms(f_ref, 10)
        cone = build_cone(10)
        eq = equilibrate(qf, cone)
        p = SdpProblem(a=eq.a_hat, b=eq.b_hat, m=eq.m_hat, max_iter=50)
        sol = solve_sdr(p)
        assert sol.status == "max_iter"
        assert sol.iterations == 50

    def test_validation_errors(self):
        with pytest.raises(ValueError):
            SdpProblem(a=np.array([[0.0, 1.0], [0.0, 0.0]]), b=np.eye(2), m=np.eye(2))
        with pytest.raises(ValueError):
            two_dim_problem(delta=0.0)
        with pytest.raises(ValueError):
            two_dim_problem(tol_feas=-1.0)


class TestExtraction:
    def make_solution(self, z):
        w, q = np.linalg.eigh(z)
        vec = q[:, -1]
        if vec[np.argmax(np.abs(vec))] < 0:
            vec = -vec
        return SdpSolution(
            z_mat=z,
            objective=0.0,
            top_eigval=float(w[-1]),
            top_eigvec=vec,
            rank_est=1,
            status="optimal",
            residuals=(0.0, 0.0),
            iterations=0,
        )

    def test_diagonal_matrix(self):
        lam, q = extract_top_eig(self.make_solution(np.diag([3.0, 1.0])))
        assert lam == 3.0
        np.testing.assert_allclose(q, [1.0, 0.0], atol=1e-15)

    def test_rank_one(self):
        v = np.array([0.6, -0.8, 0.0])
        lam, q = extract_top_eig(self.make_solution(np.outer(v, v)))
        assert lam == pytest.approx(1.0, abs=1e-12)
        # sign rule: largest-magnitude entry positive
        np.testing.assert_allclose(q, [-0.6, 0.8, 0.0], atol=1e-12)

    def test_eigen_residual_random(self):
        rng = np.random.default_rng(61)
        for _ in range(20):
            g = rng.normal(size=(6, 6))
            z = g @ g.T
            lam, q = extract_top_eig(self.make_solution(z))
            assert np.linalg.norm(z @ q - lam * q) <= 1e-9 * lam


class TestVerification:
    def test_hand_built_feasible(self):
        p = two_dim_problem()
        sol = SdpSolution(
            z_mat=np.diag([1.0, 0.0]),
            objective=1.0,
            top_eigval=1.0,
            top_eigvec=np.array([1.0, 0.0]),
            rank_est=1,
            status="optimal",
            residuals=(0.0, 0.0),
            iterations=0,
        )
        assert verify_solution(p, sol).passed

    def test_negative_eigenvalue_fails_psd(self):
        p = two_dim_problem()
        z = np.diag([1.001, -1e-3])
        sol = SdpSolution(
            z_mat=z,
            objective=1.001,
            top_eigval=1.001,
            top_eigvec=np.array([1.0, 0.0]),
            rank_est=1,
            status="optimal",
            residuals=(0.0, 0.0),
            iterations=0,
        )
        report = verify_solution(p, sol)
        psd = {c.name: c for c in report.checks}["psd_min_eigenvalue"]
        assert not psd.passed


class TestProblemProperties:
    def test_delta_scaling_covariance(self, f_ref):
        qf = build_forms(f_ref, 5)
        cone = build_cone(5)
        eq = equilibrate(qf, cone)
        sol1 = solve_sdr(SdpProblem(a=eq.a_hat, b=eq.b_hat, m=eq.m_hat, delta=1.0))
        sol2 = solve_sdr(SdpProblem(a=eq.a_hat, b=eq.b_hat, m=eq.m_hat, delta=2.0))
        assert sol1.status == sol2.status == "optimal"
        deviation = np.linalg.norm(sol2.z_mat - 2.0 * sol1.z_mat)
        assert deviation <= 1e-4 * np.linalg.norm(2.0 * sol1.z_mat)
        assert sol2.objective / 2.0 == pytest.approx(sol1.objective, abs=1e-6)

    def test_normalized_objective_at_most_one(self, f_ref):
        for d in (3, 6):
            qf = build_forms(f_ref, d)
            cone = build_cone(d)
            eq = equilibrate(qf, cone)
            sol = solve_sdr(SdpProblem(a=eq.a_hat, b=eq.b_hat, m=eq.m_hat))
            assert sol.status == "optimal"
            assert sol.objective <= 1.0 + 1e-6

    def test_relaxation_dominates_feasible_vectors(self, f_ref):
        d = 8
        qf = build_forms(f_ref, d)
        cone = build_cone(d)
        eq = equilibrate(qf, cone)
        sol = solve_sdr(SdpProblem(a=eq.a_hat, b=eq.b_hat, m=eq.m_hat))
        assert sol.status == "optimal"
        rng = np.random.default_rng(67)
        for _ in range(100):
            w = rng.random(d)
            z = solve_triangular(cone.m, w, lower=True)
            assert rayleigh(qf, z) <= sol.objective + 1e-6

    def test_determinism(self):
        p = two_dim_problem()
        s1 = solve_sdr(p)
        s2 = solve_sdr(p)
        assert np.array_equal(s1.z_mat, s2.z_mat)
        assert s1.iterations == s2.iterations
