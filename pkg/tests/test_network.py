import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy import integrate, stats

from isacnet.errors import DegenerateLaw, DomainError, ValidationError
from isacnet.network import (DEFAULTS, Allocation, DistanceLaw, NetworkConfig, ccdf_rq_over_2r, pdf_eval,
                             validate_allocation)


class TestConfig:
    def test_defaults(self):
        d = NetworkConfig()
        assert d == DEFAULTS
        assert (d.lambda_b, d.m_t, d.m_r, d.alpha, d.beta, d.j_max) == (1.0, 20, 10, 4.0, 2.0, 10)

    @pytest.mark.parametrize("kw", [dict(alpha=1.5), dict(lambda_b=0.0), dict(m_t=0), dict(beta=-1.0),
                                    dict(xi_sq=-0.1), dict(j_max=0)])
    def test_invalid(self, kw):
        with pytest.raises(ValidationError):
            NetworkConfig(**kw)

    def test_sensing_gain(self):
        c = DEFAULTS.replace(delta_t=10.0, m_r=40)
        assert c.sensing_gain == pytest.approx(10 * 1.0 * 40 * 0.1)


class TestAllocation:
    def test_feasible_example(self):
        rep = validate_allocation(DEFAULTS, Allocation(12, 1, 1, 1))
        assert rep.feasible and rep.diversity_order == 9

    def test_dof_violation(self):
        assert not validate_allocation(DEFAULTS.replace(m_t=2), Allocation(2, 1, 1, 2))

    def test_j_max_violation(self):
        rep = validate_allocation(DEFAULTS, Allocation(1, 1, 11, 1))
        assert not rep.feasible
        assert any("J" in v or "j_max" in v for v in rep.violations)

    def test_request_load(self):
        a = Allocation(3, 2, 2, 4)
        assert a.request_load == 3 * 1 + 2 * 3
        assert a.sensing_nulls == 6

    @pytest.mark.parametrize("bad", [0, -1, 1.5])
    def test_rejects_non_counts(self, bad):
        with pytest.raises(DomainError):
            Allocation(bad, 1, 1, 1)

    @given(st.integers(1, 20), st.integers(1, 5), st.integers(1, 10), st.integers(1, 8))
    def test_feasibility_matches_arithmetic(self, k, l, j, q):
        rep = validate_allocation(DEFAULTS, Allocation(k, l, j, q))
        assert rep.feasible == (k * l + j * (q - 1) <= 20 and j <= 10)


class TestDistanceLaws:
    def test_serving_plugin(self):
        assert pdf_eval(DistanceLaw("serving-distance", 1 / math.pi), 1.0) == pytest.approx(2 * math.exp(-1))

    def test_ratio_plugin(self):
        assert pdf_eval(DistanceLaw("ratio-eta-L", order=2), 0.5) == pytest.approx(1.0)

    def test_order_one_matches_serving(self):
        lam = 1 / math.pi
        a = pdf_eval(DistanceLaw("order-Q-distance", lam, 1), 1.0)
        assert a == pytest.approx(pdf_eval(DistanceLaw("serving-distance", lam), 1.0), rel=1e-14)
        assert a == pytest.approx(0.735759, abs=1e-6)

    def test_ratio_l1_is_degenerate(self):
        with pytest.raises(DegenerateLaw):
            pdf_eval(DistanceLaw("ratio-eta-L", order=1), 0.5)

    @pytest.mark.parametrize("law,x", [(DistanceLaw("ratio-eta-L", order=3), 1.2),
                                       (DistanceLaw("serving-distance"), -1.0)])
    def test_outside_support(self, law, x):
        with pytest.raises(DomainError):
            pdf_eval(law, x)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    @pytest.mark.parametrize("law", ["serving-distance"] + [("order-Q-distance", q) for q in (1, 2, 5, 10)])
    def test_normalised(self, lam, law):
        if isinstance(law, tuple):
            d = DistanceLaw(law[0], lam, law[1])
        else:
            d = DistanceLaw(law, lam)
        val = integrate.quad(lambda x: pdf_eval(d, x), 0, np.inf, epsabs=1e-12, epsrel=1e-10, limit=200)[0]
        assert val == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("l", [2, 3, 5])
    def test_ratio_normalised(self, l):
        d = DistanceLaw("ratio-eta-L", order=l)
        assert integrate.quad(lambda x: pdf_eval(d, x), 0, 1)[0] == pytest.approx(1.0, abs=1e-6)

    @pytest.mark.parametrize("lam", [0.5, 1.0, 2.0])
    def test_rayleigh_mean(self, lam):
        d = DistanceLaw("serving-distance", lam)
        mean = integrate.quad(lambda x: x * pdf_eval(d, x), 0, np.inf, epsrel=1e-10)[0]
        assert mean == pytest.approx(1 / (2 * math.sqrt(lam)), rel=1e-8)

    @pytest.mark.parametrize("l", [2, 3, 5])
    def test_ratio_ks_against_ppp_samples(self, l):
        rng = np.random.default_rng(l)
        arrivals = np.cumsum(rng.exponential(size=(20000, l)), axis=1)
        eta = np.sqrt(arrivals[:, 0] / arrivals[:, -1])
        cdf = lambda x: 1 - (1 - np.asarray(x) ** 2) ** (l - 1)
        assert stats.kstest(eta, cdf).pvalue > 0.01


class TestRqCcdf:
    def test_zero_exponent(self):
        assert ccdf_rq_over_2r(1.0, 2) == 0.0

    def test_first_order_tail(self):
        assert ccdf_rq_over_2r(100.0, 10) == pytest.approx(2.0e-4, rel=0.01)

    def test_sampled_oracle(self, frozen):
        p, se = frozen["ccdf_rq_1.5_12"]
        assert abs(ccdf_rq_over_2r(1.5, 12) - p) < 4 * se

    @given(st.floats(1.0001, 50), st.integers(2, 30))
    def test_probability_and_monotone_in_q(self, x, q):
        a, b = ccdf_rq_over_2r(x, q), ccdf_rq_over_2r(x, q + 1)
        assert 0 <= a <= 1 and a <= b

    def test_domain(self):
        with pytest.raises(DomainError):
            ccdf_rq_over_2r(0.5, 3)
        with pytest.raises(DomainError):
            ccdf_rq_over_2r(2.0, 1)
