import math

import numpy as np
import pytest
from scipy import optimize, stats

from hsplus._io import read_csv
from hsplus.exceptions import DomainError
from hsplus.kappa_posterior import KappaPosterior
from hsplus.mcmc import (
    McmcConfig,
    TauPolicy,
    batch_means_mcse,
    chain_generators,
    diagnostics,
    potential_scale_reduction,
    run_gibbs,
    summarize,
    write_samples_csv,
    write_summary_csv,
)
from hsplus.priors import PriorSpec


def _oracle_run(family, y, tau, draws=10_000, seed=11):
    cfg = McmcConfig(iterations=draws + 2000, burn_in=2000, seed=seed, tau_policy=TauPolicy.fixed(tau))
    return run_gibbs(np.array([y]), family, cfg)


class TestConfig:
    def test_policy_parsing(self):
        assert TauPolicy.parse("fixed:0.1") == TauPolicy.fixed(0.1)
        assert TauPolicy.parse("half_cauchy:0.005").kind == "half-cauchy"
        assert TauPolicy.parse("uniform").value is None
        with pytest.raises(ValueError):
            TauPolicy.parse("gamma:1")
        with pytest.raises(DomainError):
            TauPolicy.parse("half-cauchy:0")

    def test_config_validation(self):
        assert McmcConfig().retained == 5000
        with pytest.raises(DomainError):
            McmcConfig(iterations=100, burn_in=100)
        with pytest.raises(DomainError):
            McmcConfig(chains=0)
        with pytest.raises(DomainError):
            McmcConfig(seed=-1)

    def test_generators_are_distinct(self):
        a, b = chain_generators(1, 0, 0)
        c, _ = chain_generators(1, 0, 1)
        d, _ = chain_generators(1, 1, 0)
        draws = [g.random() for g in (a, b, c, d)]
        assert len(set(draws)) == 4

    def test_rejects_bad_data(self):
        with pytest.raises(DomainError):
            run_gibbs(np.array([1.0, np.nan]), "hs", McmcConfig(iterations=200, burn_in=0))


class TestOracle:
    @pytest.mark.parametrize("y", [0.0, 2.0, 5.0])
    @pytest.mark.parametrize("tau", [1.0, 0.1])
    def test_means_within_three_mcse(self, family, y, tau):
        res = _oracle_run(family, y, tau)
        kp = KappaPosterior(y, PriorSpec(family, tau))
        th_se = batch_means_mcse(res.theta)[0]
        k_se = batch_means_mcse(res.kappa)[0]
        assert abs(res.summary.mean[0] - kp.theta_mean()) < 3 * th_se
        assert abs(res.kappa_mean[0] - kp.mean()) < 3 * k_se

    def test_interval_covers_oracle_mean(self):
        res = _oracle_run("hs+", 5.0, 0.1)
        oracle = KappaPosterior(5.0, PriorSpec("hs+", 0.1)).theta_mean()
        assert res.summary.lower[0] <= oracle <= res.summary.upper[0]

    def test_theta_marginal_goodness_of_fit(self):
        # thinned long chain vs the quadrature posterior cdf on 20 equiprobable bins
        y, spec = 2.0, PriorSpec("hs+", 1.0)
        kp = KappaPosterior(y, spec)
        res = run_gibbs(np.array([y]), "hs+", McmcConfig(iterations=402_000, burn_in=2000, seed=3,
                                                         tau_policy=TauPolicy.fixed(1.0), keep_kappa=False))
        draws = res.theta[0, ::40, 0]
        edges = [optimize.brentq(lambda x, q=q: kp.theta_cdf(x) - q, -20, 25, xtol=1e-10)
                 for q in np.arange(1, 20) / 20]
        counts = np.bincount(np.searchsorted(edges, draws), minlength=20)
        p = stats.chisquare(counts).pvalue
        assert p > 0.001

    def test_scales_remain_positive(self):
        cfg = McmcConfig(iterations=3000, burn_in=0, seed=4, tau_policy="half-cauchy:0.005")
        res = run_gibbs(np.r_[np.zeros(50), 8.0], "hs+", cfg)
        assert np.all(res.tau > 0) and np.all(res.kappa > 0) and np.all(res.kappa <= 1)


class TestReproducibility:
    def test_same_seed_same_stream(self):
        cfg = McmcConfig(iterations=700, burn_in=200, seed=9, tau_policy="uniform")
        y = np.array([0.5, -3.0, 7.0])
        a, b = run_gibbs(y, "hs+", cfg), run_gibbs(y, "hs+", cfg)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.tau, b.tau)

    @pytest.mark.parametrize("policy", ["half-cauchy:1", "uniform"])
    def test_threads_do_not_change_output(self, policy):
        cfg = McmcConfig(iterations=600, burn_in=100, seed=10, tau_policy=policy, chains=4)
        y = np.array([0.0, 2.0, -4.0, 1.0])
        a = run_gibbs(y, "hs", cfg, threads=1)
        b = run_gibbs(y, "hs", cfg, threads=4)
        np.testing.assert_array_equal(a.theta, b.theta)
        np.testing.assert_array_equal(a.kappa_mean, b.kappa_mean)

    def test_replicates_differ(self):
        cfg = McmcConfig(iterations=300, burn_in=100)
        a = run_gibbs([1.0], "hs", cfg, replicate=0)
        b = run_gibbs([1.0], "hs", cfg, replicate=1)
        assert not np.array_equal(a.theta, b.theta)


def test_sparse_uniform_tau_separates_signals():
    rng = np.random.default_rng(2015)
    theta = np.r_[np.full(10, 7.0), np.zeros(190)]
    y = theta + rng.standard_normal(200)
    res = run_gibbs(y, "hs+", McmcConfig(tau_policy="uniform", seed=1, keep_kappa=False))
    omega = res.summary.omega
    assert omega[10:].mean() < omega[:10].mean()
    assert np.all(omega[:10] > 0.5)
    assert np.all((omega > 0) & (omega < 1))


class TestSummarize:
    def test_constant_columns(self):
        s = summarize(np.full((150, 3), 2.5))
        for v in (s.mean, s.median, s.lower, s.upper):
            np.testing.assert_array_equal(v, 2.5)

    def test_midpoint_median(self):
        s = summarize(np.arange(1.0, 101.0))
        assert s.median[0] == 50.5

    def test_ordering_and_omega(self, rng):
        k = rng.random((200, 4))
        s = summarize(rng.standard_normal((200, 4)), kappa=k)
        assert np.all(s.lower <= s.median) and np.all(s.median <= s.upper)
        np.testing.assert_allclose(s.omega, 1 - k.mean(axis=0))

    def test_too_few_draws(self):
        with pytest.raises(DomainError):
            summarize(np.zeros((99, 2)))


class TestDiagnostics:
    def test_identical_chains(self, rng):
        x = rng.standard_normal(10_000)
        chains = np.stack([x, x])
        # without splitting, B = 0 and var+ = (N-1)/N W
        r = potential_scale_reduction(chains, split=False)[0]
        assert r == pytest.approx(math.sqrt(9999 / 10_000), rel=1e-12)
        assert abs(r - 1) < 1e-4

    def test_independent_chains(self):
        cfg = McmcConfig(iterations=12_000, burn_in=2000, seed=21, chains=2)
        res = run_gibbs([0.0], "hs+", cfg)
        report = diagnostics(res)
        assert report.rhat[0] < 1.05
        assert not report.flagged.any()

    def test_divergent_chains_flagged(self, rng):
        x = np.stack([rng.standard_normal(1000), rng.standard_normal(1000) + 3])
        assert diagnostics(x).flagged[0]

    def test_single_chain_reports_mcse_only(self, rng):
        report = diagnostics(rng.standard_normal((1, 400)))
        assert report.rhat is None and report.mcse.shape == (1,)

    def test_mcse_scaling(self):
        cfg = McmcConfig(iterations=42_000, burn_in=2000, seed=8, keep_kappa=False)
        draws = run_gibbs([1.0], "hs+", cfg).theta[0, :, 0]
        ratio = batch_means_mcse(draws[:20_000])[0] / batch_means_mcse(draws)[0]
        assert ratio == pytest.approx(math.sqrt(2), rel=0.25)

    def test_mcse_iid(self, rng):
        x = rng.standard_normal((1, 40_000))
        assert batch_means_mcse(x)[0] == pytest.approx(1 / 200, rel=0.2)


class TestCsv:
    def test_samples_and_summary(self, tmp_path):
        cfg = McmcConfig(iterations=300, burn_in=100, chains=2)
        y = np.array([0.3, 4.0])
        res = run_gibbs(y, "hs", cfg)
        write_samples_csv(tmp_path / "s.csv", res)
        header, rows = read_csv(tmp_path / "s.csv")
        assert header == ["theta_1", "theta_2", "tau"]
        assert len(rows) == 400
        assert float(rows[250][1]) == res.theta[1, 50, 1]
        write_summary_csv(tmp_path / "m.csv", res.summary, y)
        header, rows = read_csv(tmp_path / "m.csv")
        assert header[-1] == "omega_hat" and len(rows) == 2
        assert float(rows[1][2]) == res.summary.mean[1]
