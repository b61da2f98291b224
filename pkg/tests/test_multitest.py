import math

import numpy as np
import pytest
from scipy import stats

from hsplus._io import read_csv
from hsplus.exceptions import DegenerateOracle, DomainError
from hsplus.kappa_posterior import KappaPosterior
from hsplus.multitest import (
    OracleParams,
    analytic_error_bounds,
    benjamini_hochberg,
    default_bh_alpha,
    half_threshold_rule,
    oracle_error_rates,
    oracle_exact_error_rates,
    oracle_threshold,
    oracle_threshold_direct,
    score,
    two_sided_pvalues,
    write_decisions_csv,
)
from hsplus.priors import PriorSpec


class TestHalfThreshold:
    def test_tie_accepts(self):
        np.testing.assert_array_equal(half_threshold_rule([0.5, 0.5000001, 0.2]), [False, True, False])

    def test_quadrature_omega(self, family):
        for tau in (1.0, 0.3, 0.01):
            omega = 1 - KappaPosterior(0.0, PriorSpec(family, tau)).mean()
            assert not half_threshold_rule([omega])[0]
        omega = 1 - KappaPosterior(10.0, PriorSpec("hs+", 0.1)).mean()
        assert omega > 0.98 and half_threshold_rule([omega])[0]


class TestOracle:
    def test_derived_parameters(self):
        p = OracleParams(0.1, 10.0)
        assert p.u == 10.0 and p.f == pytest.approx(9.0)
        assert p.v == pytest.approx(810.0)
        assert p.c_constant == pytest.approx(math.log(810) / 10)

    def test_unit_substitution(self):
        # u = 1 and f = 1 give v = 1
        assert oracle_threshold(OracleParams(0.5, 1.0)).c_squared == pytest.approx(2 * math.log(2), rel=1e-14)

    def test_large_u_limit(self):
        u = 1e6
        f = math.sqrt(math.e ** 2 / u)
        p = OracleParams(1 / (1 + f), u)
        assert p.v == pytest.approx(math.e ** 2, rel=1e-12)
        assert oracle_threshold(p).c_squared == pytest.approx(2.0, abs=1e-5)

    def test_parameterizations_agree(self):
        p = OracleParams(0.1, 10.0)
        assert oracle_threshold(p).c_squared == pytest.approx(oracle_threshold_direct(0.1, 10.0), rel=1e-12)

    def test_degenerate(self):
        with pytest.raises(DegenerateOracle):
            oracle_threshold(OracleParams(0.9, 0.5))
        with pytest.raises(DegenerateOracle):
            oracle_error_rates(OracleParams(0.5, 1.0))

    def test_rates_substitution(self):
        r = oracle_error_rates(OracleParams(0.1, 10.0), c=1.0)
        assert r.t2 == pytest.approx(0.68269, abs=1e-5)
        assert r.risk_per_test == pytest.approx(0.068269, abs=1e-6)

    def test_leading_order_matches_monte_carlo(self):
        p = OracleParams(0.1, 2 * math.log(200))
        rng = np.random.default_rng(77)
        m = 1_000_000
        signal = rng.random(m) < p.mu
        y = np.where(signal, math.sqrt(p.psi_sq) * rng.standard_normal(m), 0.0) + rng.standard_normal(m)
        empirical = score(oracle_threshold(p).reject(y), signal).mp
        assert empirical == pytest.approx(oracle_error_rates(p).mp, rel=0.05)
        assert empirical == pytest.approx(oracle_exact_error_rates(p).mp, abs=4 * math.sqrt(empirical / m))

    def test_exact_rates_are_normal_tails(self):
        p = OracleParams(0.05, 6.0)
        c = oracle_threshold(p).c
        r = oracle_exact_error_rates(p)
        assert r.t1 == pytest.approx(2 * stats.norm.sf(c), rel=1e-12)
        assert r.t2 == pytest.approx(stats.norm.cdf(c, scale=math.sqrt(7)) - stats.norm.cdf(-c, scale=math.sqrt(7)))

    @pytest.mark.parametrize("mu,psi", [(0.0, 1.0), (1.0, 1.0), (0.5, 0.0), (0.5, math.inf)])
    def test_params_domain(self, mu, psi):
        with pytest.raises(DomainError):
            OracleParams(mu, psi)


class TestBenjaminiHochberg:
    def test_hand_example(self):
        np.testing.assert_array_equal(benjamini_hochberg([0.01, 0.02, 0.9], 0.15), [True, True, False])

    def test_step_up_not_step_down(self):
        # p_(1) fails its own threshold but p_(2) passes, so both are rejected
        np.testing.assert_array_equal(benjamini_hochberg([0.04, 0.045, 0.9], 0.1), [True, True, False])

    def test_default_alpha(self):
        assert default_bh_alpha(200) == pytest.approx(0.18873, abs=1e-5)
        assert round(default_bh_alpha(200), 4) == 0.1887

    def test_edge_cases(self):
        assert not benjamini_hochberg(np.ones(5), 0.2).any()
        assert benjamini_hochberg([], 0.1).size == 0
        with pytest.raises(DomainError):
            benjamini_hochberg([0.5, 1.2], 0.1)
        with pytest.raises(DomainError):
            benjamini_hochberg([0.5], 1.0)

    def test_permutation_equivariant(self, rng):
        p = rng.random(300) ** 3
        perm = rng.permutation(300)
        np.testing.assert_array_equal(benjamini_hochberg(p, 0.1)[perm], benjamini_hochberg(p[perm], 0.1))

    def test_matches_scipy(self, rng):
        p = rng.random(500) ** 4
        adjusted = stats.false_discovery_control(p, method="bh")
        np.testing.assert_array_equal(benjamini_hochberg(p, 0.05), adjusted <= 0.05)

    def test_two_sided_pvalues(self):
        np.testing.assert_allclose(two_sided_pvalues([0.0, 1.959963984540054, -40.0]),
                                   [1.0, 0.05, 2 * stats.norm.sf(40.0)], rtol=1e-12)


class TestAnalyticBounds:
    def test_substitution(self):
        t1, t2 = analytic_error_bounds(PriorSpec("hs+", 0.05), OracleParams(0.05, 6.0), 0.25, 1 / 9, c=1.0)
        assert t1 == pytest.approx(0.001315, abs=5e-7)
        assert t2 == pytest.approx(2 * stats.norm.cdf(3.0) - 1, rel=1e-12)
        assert t2 == pytest.approx(0.99730, abs=5e-6)

    def test_type_one_increasing(self):
        p = OracleParams(0.1, 5.0)
        vals = [analytic_error_bounds(PriorSpec("hs+", t), p, 0.25, 1 / 9)[0] for t in np.linspace(0.005, 0.2, 40)]
        assert np.all(np.diff(vals) > 0)

    def test_domain(self):
        with pytest.raises(DomainError):
            analytic_error_bounds(PriorSpec("hs+", 0.5), OracleParams(0.1, 5.0), 0.25, 1 / 9)


class TestScore:
    def test_counting_example(self):
        r = score([1, 1, 0, 0], [1, 0, 0, 1])
        assert (r.t1, r.t2, r.mp, r.risk) == (0.5, 0.5, 0.5, 2.0)

    def test_perfect(self):
        assert score([1, 0, 1], [3.2, 0, -1]).mp == 0.0

    def test_always_accept(self):
        truth = np.r_[np.ones(20), np.zeros(180)]
        assert score(np.zeros(200, bool), truth).mp == 0.1

    def test_undefined_rates(self):
        r = score([True, False], [0, 0])
        assert math.isnan(r.t2) and r.t1 == 0.5 and r.mp == 0.5

    def test_mp_decomposition(self, rng):
        truth = rng.random(1000) < 0.2
        d = rng.random(1000) < 0.3
        r = score(d, truth)
        mu = truth.mean()
        assert r.mp == pytest.approx((1 - mu) * r.t1 + mu * r.t2, rel=1e-12)

    def test_length_mismatch(self):
        with pytest.raises(DomainError):
            score([1, 0], [1])

    def test_csv(self, tmp_path):
        write_decisions_csv(tmp_path / "d.csv", [0.1, 3.0], [0.2, 0.9], [False, True], [0, 2.0])
        header, rows = read_csv(tmp_path / "d.csv")
        assert header == ["index", "y", "omega_hat", "reject", "truth"]
        assert rows[1] == ["2", "3.0", "0.9", "1", "1"]
