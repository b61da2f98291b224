import os
import subprocess
import sys

import numpy as np
import pytest

from hsplus import _backend, _fallback
from hsplus.kappa_posterior import _batch_rule
from hsplus.mcmc import McmcConfig, TauPolicy, run_gibbs
from hsplus.priors import PriorSpec

needs_compiled = pytest.mark.skipif("cython" not in _backend.available(),
                                    reason="compiled kernels not built")


def _state(n, seed):
    rng = np.random.default_rng(seed)
    y = rng.standard_normal(n) * 3
    return y, [y.copy(), np.ones(n), np.ones(n), np.ones(n), np.ones(n)]


def _sweep(kern, plus, policy, n=7, iters=50, burn=10):
    y, (theta, lam2, nu, eta2, xi) = _state(n, 1)
    rng = np.random.default_rng(2)
    width = (4 if plus else 2) * n + 1
    normals = rng.standard_normal((iters, n))
    exps = rng.standard_exponential((iters, width))
    gammas = rng.standard_gamma(0.5 * (n + 1), iters)
    scal = np.array([0.3, 1.0, 0.25, 0.0])
    r = iters - burn
    theta_out, kappa_out, tau_out = np.empty((r, n)), np.empty((r, n)), np.empty(r)
    ksum = np.zeros(n)
    kern.gibbs_sweeps(y, theta, lam2, nu, eta2, xi, scal, plus, policy, normals, exps, gammas,
                      0.5 * (n + 1), theta_out, kappa_out, tau_out, ksum, 0, burn)
    return theta_out, kappa_out, tau_out, ksum, scal


def test_default_backend_is_listed():
    assert _backend.active() in _backend.available()
    assert _backend.kernels("numpy") is _fallback


def test_unknown_backend():
    with pytest.raises(ValueError):
        _backend.kernels("fortran")


def test_environment_forces_fallback():
    env = dict(os.environ, HSPLUS_PURE_PYTHON="1")
    out = subprocess.run([sys.executable, "-c", "from hsplus import _backend; print(_backend.active())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "numpy"


@needs_compiled
@pytest.mark.parametrize("plus", [False, True])
@pytest.mark.parametrize("policy", [_fallback.POLICY_FIXED, _fallback.POLICY_HALF_CAUCHY])
def test_sweeps_agree_across_backends(plus, policy):
    a = _sweep(_backend.kernels("cython"), plus, policy)
    b = _sweep(_backend.kernels("numpy"), plus, policy)
    for x, z in zip(a, b):
        np.testing.assert_allclose(x, z, rtol=1e-11, atol=1e-300)


@needs_compiled
@pytest.mark.parametrize("family", ["hs", "hs+"])
def test_batch_kappa_agrees_across_backends(family):
    nodes, weights = _batch_rule(PriorSpec(family, 0.05))
    y = np.abs(np.linspace(-30, 30, 301))
    np.testing.assert_allclose(_backend.kernels("cython").batch_kappa_mean(y, nodes, weights),
                               _backend.kernels("numpy").batch_kappa_mean(y, nodes, weights), rtol=1e-13)


@needs_compiled
@pytest.mark.parametrize("policy", ["half-cauchy:0.5", "uniform"])
def test_chains_agree_across_backends(policy):
    cfg = McmcConfig(iterations=600, burn_in=100, seed=5, tau_policy=policy)
    y = np.array([0.0, 1.0, 4.0, -6.0])
    a = run_gibbs(y, "hs+", cfg, backend="cython")
    b = run_gibbs(y, "hs+", cfg, backend="numpy")
    assert (a.backend, b.backend) == ("cython", "numpy")
    np.testing.assert_allclose(a.theta, b.theta, rtol=1e-9, atol=1e-12)


def test_scale_floor_counts_clamps():
    # a huge nu with theta = 0 pushes the lambda^2 draw below the floor
    n = 3
    y = np.zeros(n)
    state = [y.copy(), np.full(n, 1e-200), np.full(n, 1e300), np.ones(n), np.ones(n)]
    scal = np.array([1e-290, 1.0, 1.0, 0.0])
    ones = np.ones((4, 4 * n + 1))
    out = np.empty((4, n))
    for kern in {_backend.kernels(), _fallback}:
        st = [s.copy() for s in state]
        sc = scal.copy()
        kern.gibbs_sweeps(y, *st, sc, True, _fallback.POLICY_FIXED, np.zeros((4, n)), ones * 1e10,
                          np.ones(4), 2.0, out, np.empty((0, n)), np.empty(4), np.zeros(n), 0, 0)
        assert sc[_fallback.CLAMPS] > 0
        assert np.all(st[1] >= _fallback.SCALE_FLOOR)


def test_fixed_tau_policy_leaves_tau_unchanged():
    tau = _sweep(_fallback, True, _fallback.POLICY_FIXED)[2]
    np.testing.assert_array_equal(tau, np.sqrt(0.3))


def test_half_cauchy_config_parses():
    assert str(TauPolicy.parse("half-cauchy:0.5")) == "half-cauchy:0.5"
