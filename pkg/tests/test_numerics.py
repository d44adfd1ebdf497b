import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import beta as beta_fn
from scipy.special import gamma as gamma_fn

from isacnet.errors import ConvergenceError, DomainError
from isacnet.numerics import (NESTED_TOL, SINGLE_TOL, SPECIAL_TOL, QuadSpec, gauss_laguerre, gauss_legendre,
                              graded_unit_rule, incomplete_beta, integrate_finite, integrate_semi_infinite,
                              lower_incomplete_gamma)


class TestQuadSpec:
    def test_default_tiers_are_ordered(self):
        assert SPECIAL_TOL.rel_tol < SINGLE_TOL.rel_tol < NESTED_TOL.rel_tol

    @pytest.mark.parametrize("kw", [dict(rel_tol=0.0, abs_tol=1e-9), dict(rel_tol=1e-6, abs_tol=-1.0),
                                    dict(rel_tol=1e-6, abs_tol=1e-9, max_subdivisions=0)])
    def test_rejects_bad_values(self, kw):
        with pytest.raises(DomainError):
            QuadSpec(**kw)


class TestIncompleteBeta:
    def test_unit_integrand(self):
        assert incomplete_beta(1, 1, 1) == pytest.approx(1.0, abs=1e-14)

    def test_empty_interval(self):
        assert incomplete_beta(0, 0.7, 3.2) == 0.0

    def test_inverse_sqrt(self):
        assert incomplete_beta(0.5, 0.5, 1) == pytest.approx(2 * math.sqrt(0.5), rel=1e-10)

    def test_brute_force_oracle(self, frozen):
        assert incomplete_beta(0.3, 0.5, 2.5) == pytest.approx(frozen["incomplete_beta_0.3_0.5_2.5"], rel=1e-8)

    @pytest.mark.parametrize("a", [-0.1, 1.2, math.nan])
    def test_domain(self, a):
        with pytest.raises(DomainError):
            incomplete_beta(a, 1.0, 1.0)

    @given(st.floats(0.05, 5), st.floats(0.05, 5), st.floats(0, 1), st.floats(0, 1))
    def test_monotone_in_upper_limit(self, b, c, a1, a2):
        lo, hi = sorted((a1, a2))
        assert incomplete_beta(lo, b, c) <= incomplete_beta(hi, b, c) * (1 + 1e-12) + 1e-300

    @given(st.floats(0.05, 8), st.floats(0.05, 8))
    def test_complete_at_one(self, b, c):
        assert incomplete_beta(1.0, b, c) == pytest.approx(beta_fn(b, c), rel=SPECIAL_TOL.rel_tol)


class TestLowerIncompleteGamma:
    def test_exponential(self):
        assert lower_incomplete_gamma(1, 1) == pytest.approx(1 - math.exp(-1), rel=1e-12)

    def test_half(self):
        assert lower_incomplete_gamma(0.5, 1) == pytest.approx(math.sqrt(math.pi) * math.erf(1), rel=1e-12)
        assert lower_incomplete_gamma(0.5, 1) == pytest.approx(1.493648, abs=1e-6)

    @given(st.floats(0.01, 20))
    def test_zero_upper_limit(self, a):
        assert lower_incomplete_gamma(a, 0.0) == 0.0

    @pytest.mark.parametrize("a", [0.5, 1.0, 1.5])
    def test_tends_to_complete_gamma(self, a):
        assert lower_incomplete_gamma(a, 50.0) == pytest.approx(gamma_fn(a), rel=1e-10)

    def test_domain(self):
        with pytest.raises(DomainError):
            lower_incomplete_gamma(0.0, 1.0)
        with pytest.raises(DomainError):
            lower_incomplete_gamma(1.0, -1.0)


class TestIntegrateSemiInfinite:
    def test_exponential(self):
        assert integrate_semi_infinite(lambda z: math.exp(-z)) == pytest.approx(1.0, rel=1e-9)

    def test_gaussian_moment(self):
        assert integrate_semi_infinite(lambda z: z * math.exp(-z * z)) == pytest.approx(0.5, rel=1e-9)

    def test_rational_oracle(self, frozen):
        val = integrate_semi_infinite(lambda z: 1.0 / ((1 + z) * (1 + z * z)))
        assert val == pytest.approx(frozen["semi_infinite_rational"], rel=1e-6)

    def test_value_at_zero_is_used(self):
        def f(z):
            return 1.0 if z == 0 else -math.expm1(-z) / z * math.exp(-z)

        assert integrate_semi_infinite(f, at_zero=1.0) == pytest.approx(math.log(2.0), rel=1e-8)

    def test_divergent_raises(self):
        with pytest.raises(ConvergenceError) as info:
            integrate_semi_infinite(lambda z: 1.0 / (1.0 + z), QuadSpec(1e-8, 1e-14, 50))
        assert info.value.error >= 0

    @given(st.floats(-3, 3), st.floats(-3, 3), st.floats(0.5, 3), st.floats(0.5, 3))
    def test_linear(self, a, b, s, t):
        f = lambda z: math.exp(-s * z)
        g = lambda z: z * math.exp(-t * z)
        lhs = integrate_semi_infinite(lambda z: a * f(z) + b * g(z))
        rhs = a * integrate_semi_infinite(f) + b * integrate_semi_infinite(g)
        tol = SINGLE_TOL.rel_tol * (abs(a) / s + abs(b) / t ** 2) * 3 + 3 * SINGLE_TOL.abs_tol
        assert abs(lhs - rhs) <= tol


class TestFiniteRules:
    def test_finite(self):
        assert integrate_finite(math.sin, 0, math.pi) == pytest.approx(2.0, rel=1e-10)

    def test_gauss_legendre_exact_for_polynomials(self):
        x, w = gauss_legendre(5, 1.0, 3.0)
        assert np.dot(w, x ** 9) == pytest.approx((3 ** 10 - 1) / 10, rel=1e-12)

    def test_gauss_laguerre(self):
        x, w = gauss_laguerre(20)
        assert np.dot(w, x ** 3) == pytest.approx(6.0, rel=1e-10)

    def test_graded_rule_integrates_endpoint_singularity(self):
        u, w = graded_unit_rule(5, 0.5)
        assert w.sum() == pytest.approx(1.0, rel=1e-12)
        assert np.all((u > 0) & (u < 1))
        # E[exp(-a U)] for U ~ Exp(1) written on (0,1) through u = -ln(1-w)
        vals = np.exp(-3.0 * -np.log1p(-u))
        assert np.dot(w, vals) == pytest.approx(0.25, rel=1e-5)
