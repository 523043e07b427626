"""Sparse polynomial arithmetic against hand values, sympy expansion and
Gauss-Legendre quadrature oracles."""

import numpy as np
import pytest
import sympy

from nomoapprox import MultiPoly, UniPoly

from conftest import gl01, gl_integrate_2d, reference_callable, reference_poly


def x(k, n=2):
    return MultiPoly.variable(n, k)


def sympy_poly(p: MultiPoly):
    syms = sympy.symbols(f"s1:{p.num_vars + 1}")
    expr = sympy.Integer(0)
    for exp, c in p.sorted_terms():
        term = sympy.Float(c, 17)
        for s, e in zip(syms, exp):
            term *= s**e
        expr += term
    return sympy.Poly(expr, *syms)


class TestAdd:
    def test_cancellation_gives_empty_map(self):
        p = x(1) + (-1.0) * x(1)
        assert p.terms == {}
        assert not p

    def test_disjoint_supports(self):
        p = (x(1) + x(2)) + x(1) * x(2)
        assert p.terms == {(1, 0): 1.0, (0, 1): 1.0, (1, 1): 1.0}

    def test_doubling_term_by_term(self):
        f = reference_poly()
        ff = f + f
        assert set(ff.terms) == set(f.terms)
        for exp, c in f.terms.items():
            assert ff.terms[exp] == 2.0 * c

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            x(1, 2) + x(1, 3)


class TestMul:
    def test_monomials(self):
        assert (x(1) * x(2)).terms == {(1, 1): 1.0}

    def test_binomial_square(self):
        p = (x(1) + x(2)) ** 2
        assert p.terms == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}

    def test_square_of_reference_matches_sympy(self):
        f = reference_poly()
        ff = f * f
        assert ff.degree_per_var == (4, 4)
        expected = sympy_poly(f) * sympy_poly(f)
        got = sympy_poly(ff)
        diff = (expected - got).as_dict()
        assert all(abs(float(c)) < 1e-15 for c in diff.values())

    def test_eval_consistency_random(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            p = MultiPoly(2, {(int(a), int(b)): float(c)
                              for a, b, c in zip(rng.integers(0, 4, 5),
                                                 rng.integers(0, 4, 5),
                                                 rng.normal(size=5))})
            q = MultiPoly(2, {(int(a), int(b)): float(c)
                              for a, b, c in zip(rng.integers(0, 4, 5),
                                                 rng.integers(0, 4, 5),
                                                 rng.normal(size=5))})
            pt = rng.random(2)
            lhs = (p * q)(pt)
            rhs = p(pt) * q(pt)
            assert lhs == pytest.approx(rhs, rel=1e-10, abs=1e-12)


class TestPow:
    def test_cube_of_variable(self):
        assert (x(1) ** 3).terms == {(3, 0): 1.0}

    def test_power_one_is_identity(self):
        f = reference_poly()
        assert f**1 == f

    def test_power_zero_is_one(self):
        f = reference_poly()
        assert (f**0).terms == {(0, 0): 1.0}

    def test_high_power_degree_and_term_count(self):
        f = reference_poly()
        p = f**40
        assert p.degree_per_var == (80, 80)
        assert len(p) <= 81 * 81
        # expansion oracle: (x1 + x1 x2 + x2)^80 term count
        s1, s2 = sympy.symbols("s1 s2")
        expansion = sympy.Poly((s1 + s1 * s2 + s2) ** 80, s1, s2)
        assert len(p) == len(expansion.as_dict())


class TestIntegration:
    def test_monomial(self):
        p = x(1) ** 2 * x(2)
        assert p.integral() == pytest.approx(1.0 / 6.0, abs=1e-15)

    def test_constant_one(self):
        assert MultiPoly.constant(3, 1.0).integral() == 1.0

    def test_reference_against_quadrature(self):
        f = reference_poly()
        oracle = gl_integrate_2d(reference_callable, 41)
        assert abs(f.integral() - oracle) <= 1e-12

    def test_linearity_random(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            p = MultiPoly(3, {tuple(int(v) for v in rng.integers(0, 3, 3)): float(c)
                              for c in rng.normal(size=4)})
            q = MultiPoly(3, {tuple(int(v) for v in rng.integers(0, 3, 3)): float(c)
                              for c in rng.normal(size=4)})
            a, b = rng.normal(size=2)
            lhs = (a * p + b * q).integral()
            rhs = a * p.integral() + b * q.integral()
            assert lhs == pytest.approx(rhs, rel=1e-12, abs=1e-12)

    def test_gauss_legendre_exactness(self):
        # an n-node rule reproduces any per-variable degree <= 2n-1 integral
        rng = np.random.default_rng(3)
        n = 6
        exps = [(int(a), int(b)) for a, b in rng.integers(0, 2 * n - 1, (6, 2))]
        p = MultiPoly(2, {e: float(c) for e, c in zip(exps, rng.normal(size=6))})
        xs, w = gl01(n)
        X1, X2 = np.meshgrid(xs, xs, indexing="ij")
        vals = p.eval_grid([xs, xs])
        quad = float(np.sum(np.outer(w, w) * vals))
        assert abs(quad - p.integral()) <= 1e-12


class TestMarginal:
    def test_product_monomial(self):
        p = x(1) * x(2)
        m = p.marginal(1)
        assert m == UniPoly([0.0, 0.5])

    def test_single_variable_untouched(self):
        p = x(1) ** 2
        assert p.marginal(1) == UniPoly([0.0, 0.0, 1.0])

    def test_reference_against_quadrature_sweeps(self):
        f = reference_poly()
        m = f.marginal(1)
        u, w = gl01(21)
        for x1 in np.linspace(0.0, 1.0, 11):
            oracle = float(np.sum(w * reference_callable(x1, u)))
            assert abs(m(x1) - oracle) <= 1e-12

    def test_fubini_consistency(self):
        rng = np.random.default_rng(5)
        p = MultiPoly(3, {tuple(int(v) for v in rng.integers(0, 4, 3)): float(c)
                          for c in rng.normal(size=8)})
        for k in (1, 2, 3):
            assert p.marginal(k).integral01() == pytest.approx(
                p.integral(), rel=1e-12, abs=1e-14
            )

    def test_index_out_of_range(self):
        with pytest.raises(IndexError):
            reference_poly().marginal(3)


class TestEval:
    def test_reference_corners(self):
        f = reference_poly()
        assert f((0.0, 0.0)) == 0.0
        assert f((1.0, 1.0)) == pytest.approx(1.0, abs=1e-15)

    def test_reference_midpoint(self):
        f = reference_poly()
        assert f((0.5, 0.5)) == pytest.approx(25.0 / 144.0, abs=1e-15)

    def test_eval_grid_matches_pointwise(self):
        f = reference_poly()
        axes = [np.linspace(0, 1, 7), np.linspace(0, 1, 5)]
        grid = f.eval_grid(axes)
        for i, a in enumerate(axes[0]):
            for j, b in enumerate(axes[1]):
                assert grid[i, j] == pytest.approx(f((a, b)), abs=1e-14)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            reference_poly()((0.5,))


class TestCompose:
    def test_identity_skew(self):
        f = reference_poly()
        g = UniPoly([0.0, 1.0])
        assert g.compose(f) == f

    def test_square_skew(self):
        g = UniPoly([0.0, 0.0, 1.0])
        p = g.compose(x(1) + x(2))
        assert p.terms == {(2, 0): 1.0, (1, 1): 2.0, (0, 2): 1.0}

    def test_pointwise_against_direct(self):
        f = reference_poly()
        g = UniPoly([0.0, 2.0, 3.0])
        comp = g.compose(f)
        for a in np.linspace(0, 1, 5):
            for b in np.linspace(0, 1, 5):
                direct = g(f((a, b)))
                assert abs(comp((a, b)) - direct) <= 1e-12


class TestCanonicalForm:
    def test_no_zero_coefficients_stored(self):
        p = MultiPoly(2, {(1, 0): 0.0, (0, 1): 2.0})
        assert (1, 0) not in p.terms

    def test_equality_is_term_map_equality(self):
        p = x(1) + x(2)
        q = x(2) + x(1)
        assert p == q
        assert hash(p) == hash(q)

    def test_exponent_length_enforced(self):
        with pytest.raises(ValueError):
            MultiPoly(2, {(1, 0, 0): 1.0})

    def test_immutability(self):
        p = x(1)
        with pytest.raises(AttributeError):
            p.num_vars = 3


class TestJson:
    def test_round_trip(self):
        f = reference_poly()
        assert MultiPoly.from_json(f.to_json()) == f

    def test_terms_sorted_lexicographically(self):
        f = reference_poly()
        exps = [tuple(t["exp"]) for t in f.to_dict()["terms"]]
        assert exps == sorted(exps)

    def test_malformed_raises_value_error(self):
        with pytest.raises(ValueError):
            MultiPoly.from_dict({"num_vars": 2})


class TestUniPoly:
    def test_trailing_zeros_trimmed(self):
        assert UniPoly([1.0, 2.0, 0.0]).coeffs == (1.0, 2.0)
        assert UniPoly([0.0, 0.0]).coeffs == ()

    def test_degree_of_zero(self):
        assert UniPoly().degree == -1

    def test_mul_and_integral(self):
        u = UniPoly([0.0, 1.0])  # t
        v = UniPoly([1.0, 1.0])  # 1 + t
        assert (u * v).coeffs == (0.0, 1.0, 1.0)
        assert (u * v).integral01() == pytest.approx(1.0 / 2.0 + 1.0 / 3.0)

    def test_derivative(self):
        assert UniPoly([5.0, 1.0, 3.0]).derivative() == UniPoly([1.0, 6.0])

    def test_vector_evaluation(self):
        u = UniPoly([1.0, -1.0])
        out = u(np.array([0.0, 1.0]))
        np.testing.assert_allclose(out, [1.0, 0.0])

    def test_embed(self):
        u = UniPoly([0.5, 2.0])
        p = u.embed(3, 2)
        assert p.terms == {(0, 0, 0): 0.5, (0, 1, 0): 2.0}
