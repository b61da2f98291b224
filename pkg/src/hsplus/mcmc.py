"""Gibbs sampler for the horseshoe and horseshoe+ normal-means models.

Model: ``y_i ~ N(theta_i, 1)``, ``theta_i ~ N(0, lambda_i^2)`` with
``lambda_i ~ C+(0, tau eta_i)``; ``eta_i ~ C+(0, 1)`` for horseshoe+ and
``eta_i = 1`` for the horseshoe. The local scale ``lambda_i`` already contains
``tau``, so the shrinkage weight ``kappa_i = 1/(1 + lambda_i^2)`` is the same
number as ``1/(1 + lambda~_i^2 tau^2)`` written with the de-scaled local scale
``lambda~_i = lambda_i / tau``.

Every half-Cauchy layer is split into two inverse-gamma layers
(``x^2 | a ~ IG(1/2, 1/a)``, ``a ~ IG(1/2, 1/s^2)``), which makes all local full
conditionals ``IG(1, b) = b / Exp(1)`` draws:

    theta_i | .    ~ N(y_i lambda_i^2/(1+lambda_i^2), lambda_i^2/(1+lambda_i^2))
    lambda_i^2 | . ~ IG(1, 1/nu_i + theta_i^2/2)
    nu_i | .       ~ IG(1, 1/lambda_i^2 + 1/(tau^2 eta_i^2))
    eta_i^2 | .    ~ IG(1, 1/(nu_i tau^2) + 1/xi_i)        (horseshoe+)
    xi_i | .       ~ IG(1, 1 + 1/eta_i^2)                   (horseshoe+)

The global scale is fixed, half-Cauchy (conjugate ``tau^2 ~ IG((n+1)/2, .)``
with its own auxiliary) or uniform on (0, 1) (stepping-out slice sampler on
``log tau``).

Reproducibility
---------------
Chain ``c`` of replicate ``r`` under master seed ``s`` draws from
``PCG64(SeedSequence(s, spawn_key=(r, c, 0)))``; the slice sampler for a
uniform ``tau`` uses ``spawn_key=(r, c, 1)``. Random numbers are drawn in
blocks of ``BLOCK`` iterations, so output does not depend on the backend or on
the number of threads.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import _backend
from ._fallback import CLAMPS, POLICY_EXTERNAL, POLICY_FIXED, POLICY_HALF_CAUCHY, TAU2
from ._io import write_csv
from .exceptions import DomainError
from .priors import Family

log = logging.getLogger(__name__)

__all__ = [
    "TauPolicy",
    "McmcConfig",
    "PosteriorSummary",
    "GibbsResult",
    "Diagnostics",
    "chain_generators",
    "run_gibbs",
    "summarize",
    "diagnostics",
    "potential_scale_reduction",
    "batch_means_mcse",
    "write_samples_csv",
    "write_summary_csv",
]

BLOCK = 128
MIN_SUMMARY_DRAWS = 100


@dataclass(frozen=True)
class TauPolicy:
    """Treatment of the global scale: ``fixed`` (value = tau), ``half-cauchy``
    (value = scale s) or ``uniform`` on (0, 1)."""

    kind: str
    value: float = None

    def __post_init__(self):
        kind = self.kind.lower().replace("_", "-")
        if kind in ("halfcauchy", "cauchy"):
            kind = "half-cauchy"
        if kind in ("unif", "uniform01"):
            kind = "uniform"
        if kind not in ("fixed", "half-cauchy", "uniform"):
            raise ValueError(f"unknown tau policy {self.kind!r}")
        object.__setattr__(self, "kind", kind)
        if kind != "uniform":
            if self.value is None or not (math.isfinite(self.value) and self.value > 0.0):
                raise DomainError(f"tau policy {kind!r} needs a positive value")
            object.__setattr__(self, "value", float(self.value))

    @classmethod
    def parse(cls, text):
        """Parse ``fixed:R``, ``half-cauchy:S`` or ``uniform``."""
        if isinstance(text, cls):
            return text
        kind, _, val = str(text).partition(":")
        return cls(kind.strip(), float(val) if val.strip() else None)

    @classmethod
    def fixed(cls, tau):
        return cls("fixed", tau)

    @classmethod
    def half_cauchy(cls, scale):
        return cls("half-cauchy", scale)

    @classmethod
    def uniform(cls):
        return cls("uniform")

    def __str__(self):
        return self.kind if self.value is None else f"{self.kind}:{self.value!r}"


@dataclass(frozen=True)
class McmcConfig:
    iterations: int = 10_000
    burn_in: int = 5_000
    seed: int = 20150401
    tau_policy: TauPolicy = field(default_factory=lambda: TauPolicy.fixed(1.0))
    chains: int = 1
    keep_kappa: bool = True

    def __post_init__(self):
        if self.iterations < 1:
            raise DomainError("iterations must be positive")
        if not 0 <= self.burn_in < self.iterations:
            raise DomainError("burn_in must satisfy 0 <= burn_in < iterations")
        if self.chains < 1:
            raise DomainError("chains must be positive")
        if not 0 <= int(self.seed) < 2 ** 64:
            raise DomainError("seed must be a 64-bit unsigned integer")
        object.__setattr__(self, "tau_policy", TauPolicy.parse(self.tau_policy))

    @property
    def retained(self):
        return self.iterations - self.burn_in


@dataclass
class PosteriorSummary:
    """Per-coordinate posterior summaries plus the posterior mean of ``tau``."""

    mean: np.ndarray
    median: np.ndarray
    lower: np.ndarray
    upper: np.ndarray
    kappa_mean: np.ndarray
    tau_mean: float

    @property
    def omega(self):
        """Pseudo-inclusion probability ``1 - E(kappa | y)``."""
        return 1.0 - self.kappa_mean

    @property
    def n(self):
        return self.mean.shape[0]


@dataclass
class GibbsResult:
    theta: np.ndarray          # (chains, retained, n)
    tau: np.ndarray            # (chains, retained)
    kappa: np.ndarray | None   # (chains, retained, n) when kept
    kappa_mean: np.ndarray     # (n,)
    clamps: int
    summary: PosteriorSummary
    backend: str


def chain_generators(seed, replicate, chain):
    """Main and slice-sampler generators for one chain."""
    main = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=(int(replicate), int(chain), 0))))
    aux = np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=(int(replicate), int(chain), 1))))
    return main, aux


def _slice_log_tau(log_tau, n, rate, rng, width=1.0, max_steps=10_000):
    """One stepping-out slice update of ``log tau`` under a uniform(0, 1) prior on tau.

    Target on ``l = log tau``: ``-(n - 1) l - rate exp(-2 l)`` for ``l < 0``.
    """
    def logf(ell):
        if ell >= 0.0:
            return -math.inf
        e = -2.0 * ell
        if e > 700.0:
            return -math.inf
        return -(n - 1.0) * ell - rate * math.exp(e)

    level = logf(log_tau) + math.log(rng.random())
    left = log_tau - width * rng.random()
    right = left + width
    steps = 0
    while logf(left) > level and steps < max_steps:
        left -= width
        steps += 1
    while logf(right) > level and steps < max_steps:
        right += width
        steps += 1
    while True:
        prop = left + (right - left) * rng.random()
        if logf(prop) > level:
            return prop
        if prop < log_tau:
            left = prop
        else:
            right = prop


def _run_chain(y, plus, cfg, replicate, chain, kern):
    n = y.shape[0]
    policy = cfg.tau_policy
    rng, slice_rng = chain_generators(cfg.seed, replicate, chain)
    theta = y.copy()
    lam2 = np.ones(n)
    nu = np.ones(n)
    eta2 = np.ones(n)
    xi = np.ones(n)
    if policy.kind == "fixed":
        code, tau2, s2 = POLICY_FIXED, policy.value ** 2, 1.0
    elif policy.kind == "half-cauchy":
        code, tau2, s2 = POLICY_HALF_CAUCHY, policy.value ** 2, policy.value ** 2
    else:
        code, tau2, s2 = POLICY_EXTERNAL, 0.25, 1.0
    scal = np.array([tau2, 1.0, s2, 0.0])
    retained = cfg.retained
    theta_out = np.empty((retained, n))
    kappa_out = np.empty((retained if cfg.keep_kappa else 0, n))
    tau_out = np.empty(retained)
    kappa_sum = np.zeros(n)
    width = (4 if plus else 2) * n + 1
    shape = 0.5 * (n + 1)
    it = 0
    while it < cfg.iterations:
        nb = min(BLOCK, cfg.iterations - it)
        normals = rng.standard_normal((nb, n))
        exps = rng.standard_exponential((nb, width))
        gammas = rng.standard_gamma(shape, nb)
        if code == POLICY_EXTERNAL:
            for b in range(nb):
                rate = float(np.sum(1.0 / (nu * eta2))) if plus else float(np.sum(1.0 / nu))
                log_tau = _slice_log_tau(0.5 * math.log(scal[TAU2]), n, rate, slice_rng)
                t2 = math.exp(2.0 * log_tau)
                if t2 < 1e-300:
                    t2 = 1e-300
                    scal[CLAMPS] += 1
                scal[TAU2] = t2
                kern.gibbs_sweeps(y, theta, lam2, nu, eta2, xi, scal, plus, code,
                                  normals[b:b + 1], exps[b:b + 1], gammas[b:b + 1], shape,
                                  theta_out, kappa_out, tau_out, kappa_sum, it + b, cfg.burn_in)
        else:
            kern.gibbs_sweeps(y, theta, lam2, nu, eta2, xi, scal, plus, code, normals, exps,
                              gammas, shape, theta_out, kappa_out, tau_out, kappa_sum, it,
                              cfg.burn_in)
        it += nb
    return theta_out, kappa_out, tau_out, kappa_sum / retained, int(scal[CLAMPS])


def run_gibbs(data, family, config, replicate=0, threads=1, backend=None):
    """Sample the posterior of ``theta`` given ``y``.

    Parameters
    ----------
    data : array_like or object with attribute ``y``
    family : Family or str
    config : McmcConfig
    replicate : int
        Replicate index entering the seed derivation.
    threads : int
        Chains run concurrently on this many threads; output is unaffected.
    backend : {None, "cython", "numpy"}

    Returns
    -------
    GibbsResult
    """
    y = np.ascontiguousarray(np.asarray(getattr(data, "y", data), dtype=float).ravel())
    if y.size == 0 or not np.all(np.isfinite(y)):
        raise DomainError("data must be a non-empty finite vector")
    plus = Family.parse(family) is Family.HORSESHOE_PLUS
    kern = _backend.kernels(backend)

    def one(c):
        return _run_chain(y, plus, config, replicate, c, kern)

    if threads > 1 and config.chains > 1:
        with ThreadPoolExecutor(max_workers=min(threads, config.chains)) as pool:
            parts = list(pool.map(one, range(config.chains)))
    else:
        parts = [one(c) for c in range(config.chains)]
    theta = np.stack([p[0] for p in parts])
    kappa = np.stack([p[1] for p in parts]) if config.keep_kappa else None
    tau = np.stack([p[2] for p in parts])
    kappa_mean = np.mean([p[3] for p in parts], axis=0)
    clamps = sum(p[4] for p in parts)
    if clamps:
        log.warning("scale draws clamped at 1e-300 %d times", clamps)
    summary = summarize(theta.reshape(-1, y.size), kappa_mean=kappa_mean, tau=tau.ravel())
    return GibbsResult(theta, tau, kappa, kappa_mean, clamps, summary, kern.NAME)


def summarize(samples, kappa=None, tau=None, kappa_mean=None):
    """Posterior summaries from retained draws (rows = draws, columns = coordinates).

    Quantiles use midpoint interpolation; the credible interval is the central 95%.
    Either ``kappa`` draws or their column means ``kappa_mean`` may be supplied.
    """
    samples = np.asarray(samples, dtype=float)
    if samples.ndim == 1:
        samples = samples[:, None]
    if samples.shape[0] < MIN_SUMMARY_DRAWS:
        raise DomainError(f"need at least {MIN_SUMMARY_DRAWS} retained draws, got {samples.shape[0]}")
    lower, median, upper = np.quantile(samples, [0.025, 0.5, 0.975], axis=0, method="midpoint")
    if kappa_mean is None:
        kappa_mean = (np.mean(np.asarray(kappa, dtype=float).reshape(samples.shape), axis=0)
                      if kappa is not None else np.full(samples.shape[1], np.nan))
    tau_mean = float(np.mean(tau)) if tau is not None else float("nan")
    return PosteriorSummary(samples.mean(axis=0), median, lower, upper,
                            np.asarray(kappa_mean, dtype=float), tau_mean)


def potential_scale_reduction(draws, split=True):
    """Gelman-Rubin reduction factor per coordinate.

    ``draws`` has shape (chains, draws) or (chains, draws, n). With ``split``
    each chain is halved first. Uses ``var+ = (N-1)/N W + B/N``.
    """
    x = np.asarray(draws, dtype=float)
    if x.ndim == 2:
        x = x[:, :, None]
    if split:
        half = x.shape[1] // 2
        x = np.concatenate([x[:, :half], x[:, half:2 * half]], axis=0)
    m, n_draws = x.shape[0], x.shape[1]
    if m < 2:
        raise DomainError("need at least two sequences")
    means = x.mean(axis=1)
    w = x.var(axis=1, ddof=1).mean(axis=0)
    b = n_draws * means.var(axis=0, ddof=1)
    var_plus = (n_draws - 1) / n_draws * w + b / n_draws
    with np.errstate(divide="ignore", invalid="ignore"):
        r = np.sqrt(var_plus / w)
    return np.where(w > 0, r, 1.0)


def batch_means_mcse(draws):
    """Batch-means Monte Carlo standard error of the mean, per coordinate.

    ``draws`` has shape (chains, draws[, n]); batches of ``floor(sqrt(draws))``
    are formed within each chain and pooled.
    """
    x = np.asarray(draws, dtype=float)
    if x.ndim == 1:
        x = x[None, :]
    if x.ndim == 2:
        x = x[:, :, None]
    m, n_draws = x.shape[0], x.shape[1]
    size = max(1, int(math.isqrt(n_draws)))
    nb = n_draws // size
    bm = x[:, :nb * size].reshape(m, nb, size, -1).mean(axis=2).reshape(m * nb, -1)
    var = size * bm.var(axis=0, ddof=1)
    return np.sqrt(var / (m * nb * size))


@dataclass
class Diagnostics:
    rhat: np.ndarray | None
    mcse: np.ndarray
    flagged: np.ndarray
    clamps: int = 0


def diagnostics(samples, chains=None, threshold=1.1, clamps=0):
    """Split-chain reduction factors and batch-means MCSE.

    ``samples`` has shape (chains, draws[, n]) or is a :class:`GibbsResult`.
    With a single chain only the MCSE is reported.
    """
    if isinstance(samples, GibbsResult):
        clamps = samples.clamps
        samples = samples.theta
    x = np.asarray(samples, dtype=float)
    if chains is not None and x.ndim >= 2 and x.shape[0] != chains:
        x = x.reshape((chains, -1) + x.shape[2:] if x.ndim == 3 else (chains, -1))
    if x.ndim == 1:
        x = x[None, :]
    mcse = batch_means_mcse(x)
    if x.shape[0] < 2:
        return Diagnostics(None, mcse, np.zeros(mcse.shape, dtype=bool), clamps)
    rhat = potential_scale_reduction(x, split=True)
    return Diagnostics(rhat, mcse, rhat > threshold, clamps)


def write_samples_csv(path, result):
    """One row per retained draw (chains stacked in order): ``theta_1..theta_n,tau``."""
    c, r, n = result.theta.shape
    header = [f"theta_{i + 1}" for i in range(n)] + ["tau"]
    theta = result.theta.reshape(c * r, n)
    tau = result.tau.reshape(c * r)
    write_csv(path, header, (list(theta[j]) + [tau[j]] for j in range(c * r)))


def write_summary_csv(path, summary, y=None):
    """Per-coordinate summary: ``index,y,mean,median,lower,upper,kappa_mean,omega_hat``."""
    n = summary.n
    yy = np.full(n, np.nan) if y is None else np.asarray(y, dtype=float)
    header = ["index", "y", "mean", "median", "lower", "upper", "kappa_mean", "omega_hat"]
    rows = ((i + 1, yy[i], summary.mean[i], summary.median[i], summary.lower[i], summary.upper[i],
             summary.kappa_mean[i], summary.omega[i]) for i in range(n))
    write_csv(path, header, rows)
