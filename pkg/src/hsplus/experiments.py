"""Simulation harnesses: sparse-means estimation, two-groups testing, James-Stein risk
and the Kullback-Leibler risk bound.

Seeds
-----
Data for replicate ``r`` are drawn from ``PCG64(SeedSequence(seed, spawn_key=(r,)))``;
samplers use the chain streams documented in :mod:`hsplus.mcmc`. Replicates run
on a thread pool and are aggregated in replicate order, so tables do not depend
on the thread count.
"""

import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np

from ._io import write_csv
from .exceptions import DomainError, HsPlusError
from .kappa_posterior import KappaPosterior, shrinkage_threshold
from .mcmc import McmcConfig, TauPolicy, batch_means_mcse, run_gibbs
from .multitest import (
    OracleParams,
    benjamini_hochberg,
    default_bh_alpha,
    half_threshold_rule,
    oracle_threshold,
    score,
    two_sided_pvalues,
)
from .priors import Family, PriorSpec, central_mass

log = logging.getLogger(__name__)

__all__ = [
    "NormalMeansData",
    "SseConfig",
    "SseMethod",
    "MpConfig",
    "data_generator",
    "gen_sparse_means",
    "gen_two_groups",
    "run_sse_experiment",
    "run_mp_experiment",
    "run_oracle_agreement",
    "james_stein_risk",
    "r_spike",
    "kl_divergence_normal_shift",
    "kl_risk_bound",
    "write_sse_csv",
    "write_mp_csv",
    "write_oracle_csv",
]


@dataclass
class NormalMeansData:
    y: np.ndarray
    truth: np.ndarray | None = None

    def __post_init__(self):
        self.y = np.asarray(self.y, dtype=float)
        if self.truth is not None:
            self.truth = np.asarray(self.truth, dtype=float)
            if self.truth.shape != self.y.shape:
                raise DomainError("y and truth must have equal length")

    @property
    def n(self):
        return self.y.size


@dataclass(frozen=True)
class SseConfig:
    n: int = 200
    q: float = 0.05
    A: float = 7.0
    replicates: int = 20
    mcmc: McmcConfig = field(default_factory=McmcConfig)

    def __post_init__(self):
        if not 0.0 < self.q < 1.0:
            raise DomainError("q must lie in (0, 1)")
        if int(math.floor(self.q * self.n)) < 1:
            raise DomainError("floor(q n) must be at least 1")
        if self.replicates < 1:
            raise DomainError("replicates must be positive")

    @property
    def signals(self):
        return int(math.floor(self.q * self.n + 1e-9))


@dataclass(frozen=True)
class SseMethod:
    family: Family
    tau_policy: TauPolicy

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        object.__setattr__(self, "tau_policy", TauPolicy.parse(self.tau_policy))

    @property
    def label(self):
        return f"{self.family.value}/{self.tau_policy}"

    @classmethod
    def parse(cls, text):
        """``family/policy``, e.g. ``hs+/half-cauchy:0.005`` or ``hs/uniform``."""
        fam, _, pol = str(text).partition("/")
        return cls(fam, pol or "half-cauchy:1")


@dataclass(frozen=True)
class MpConfig:
    n: int = 200
    mu_grid: tuple = (0.05, 0.1, 0.2)
    psi: float = None
    replicates: int = 200
    mode: str = "plugin"
    mcmc: McmcConfig = field(default_factory=lambda: McmcConfig(
        tau_policy=TauPolicy.half_cauchy(1.0)))

    def __post_init__(self):
        if any(not 0.0 < m < 1.0 for m in self.mu_grid):
            raise DomainError("mu grid must lie in (0, 1)")
        if self.psi is None:
            object.__setattr__(self, "psi", math.sqrt(2.0 * math.log(self.n)))
        if self.mode not in ("plugin", "full-bayes"):
            raise DomainError("mode must be 'plugin' or 'full-bayes'")
        object.__setattr__(self, "mu_grid", tuple(float(m) for m in self.mu_grid))


def data_generator(seed, replicate):
    return np.random.Generator(np.random.PCG64(
        np.random.SeedSequence(int(seed), spawn_key=(int(replicate),))))


def gen_sparse_means(cfg, seed, replicate=0):
    """First ``floor(q n)`` means equal ``A``, the rest zero, plus unit normal noise."""
    rng = data_generator(seed, replicate)
    theta = np.zeros(cfg.n)
    theta[:cfg.signals] = cfg.A
    return NormalMeansData(theta + rng.standard_normal(cfg.n), theta)


def gen_two_groups(n, mu, psi_sq, seed, replicate=0):
    """``theta_i`` is 0 with probability ``1 - mu``, else ``N(0, psi_sq)``; ``y = theta + N(0, 1)``."""
    if not 0.0 <= mu < 1.0:
        raise DomainError("mu must lie in [0, 1)")
    if not psi_sq > 0.0:
        raise DomainError("psi_sq must be positive")
    rng = data_generator(seed, replicate)
    signal = rng.random(n) < mu
    theta = np.where(signal, math.sqrt(psi_sq) * rng.standard_normal(n), 0.0)
    return NormalMeansData(theta + rng.standard_normal(n), theta)


def _pool_map(fn, items, threads):
    if threads > 1 and len(items) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _mean_se(values):
    v = np.asarray(values, dtype=float)
    if v.size == 0:
        return float("nan"), float("nan")
    se = float(np.std(v, ddof=1) / math.sqrt(v.size)) if v.size > 1 else float("nan")
    return float(np.mean(v)), se


def run_sse_experiment(cfg, methods, seed, threads=1):
    """Average squared error of the posterior median over replicates.

    Returns
    -------
    list of dict
        One row per method with keys ``method, q, A, avg_sse, mc_se, replicates``
        and ``dropped`` (replicates whose sampler failed).
    """
    methods = [m if isinstance(m, SseMethod) else SseMethod.parse(m) for m in methods]
    tasks = [(r, j) for r in range(cfg.replicates) for j in range(len(methods))]
    data = [gen_sparse_means(cfg, seed, r) for r in range(cfg.replicates)]

    def fit(task):
        r, j = task
        m = methods[j]
        mc = replace(cfg.mcmc, seed=seed, tau_policy=m.tau_policy, keep_kappa=False)
        try:
            res = run_gibbs(data[r], m.family, mc, replicate=r)
        except (HsPlusError, FloatingPointError, ValueError) as exc:
            log.warning("replicate %d, %s failed: %s", r, m.label, exc)
            return None
        return float(np.sum((res.summary.median - data[r].truth) ** 2))

    out = _pool_map(fit, tasks, threads)
    rows = []
    for j, m in enumerate(methods):
        vals = [out[k] for k, (r, jj) in enumerate(tasks) if jj == j and out[k] is not None]
        avg, se = _mean_se(vals)
        rows.append({"method": m.label, "q": cfg.q, "A": cfg.A, "avg_sse": avg, "mc_se": se,
                     "replicates": len(vals), "dropped": cfg.replicates - len(vals)})
    return rows


def write_sse_csv(path, rows):
    write_csv(path, ["method", "q", "A", "avg_sse", "mc_se", "replicates"],
              ([r["method"], r["q"], r["A"], r["avg_sse"], r["mc_se"], r["replicates"]] for r in rows))


MP_METHODS = ("hs+", "hs", "bh", "oracle", "mu")


def run_mp_experiment(cfg, seed, threads=1):
    """Misclassification probability of each rule on two-groups data.

    ``mode="plugin"`` applies the half-threshold rule with ``tau = mu`` through
    the exact quadrature threshold on ``|y|``; ``mode="full-bayes"`` runs the
    Gibbs sampler with the configured ``tau`` policy. The oracle uses the
    generating ``(mu, psi^2)``; ``mu`` is the always-accept reference.

    Returns
    -------
    list of dict
        Rows ``mu, method, mp, mc_se``.
    """
    psi_sq = cfg.psi ** 2
    alpha = default_bh_alpha(cfg.n)
    thresholds = {}
    if cfg.mode == "plugin":
        for mu in cfg.mu_grid:
            for fam in ("hs+", "hs"):
                thresholds[(fam, mu)] = shrinkage_threshold(PriorSpec(fam, mu))

    def one(task):
        i, r = task
        mu = cfg.mu_grid[i]
        # distinct data stream per (mu, replicate)
        data = gen_two_groups(cfg.n, mu, psi_sq, seed, replicate=i * 1_000_003 + r)
        truth = data.truth != 0
        mp = {}
        for fam in ("hs+", "hs"):
            if cfg.mode == "plugin":
                reject = np.abs(data.y) > thresholds[(fam, mu)]
            else:
                res = run_gibbs(data, fam, replace(cfg.mcmc, seed=seed, keep_kappa=False),
                                replicate=i * 1_000_003 + r)
                reject = half_threshold_rule(res.summary)
            mp[fam] = score(reject, truth).mp
        mp["bh"] = score(benjamini_hochberg(two_sided_pvalues(data.y), alpha), truth).mp
        mp["oracle"] = score(oracle_threshold(OracleParams(mu, psi_sq)).reject(data.y), truth).mp
        mp["mu"] = score(np.zeros(cfg.n, dtype=bool), truth).mp
        return mp

    tasks = [(i, r) for i in range(len(cfg.mu_grid)) for r in range(cfg.replicates)]
    out = _pool_map(one, tasks, threads)
    rows = []
    for i, mu in enumerate(cfg.mu_grid):
        per = [out[k] for k, (ii, _) in enumerate(tasks) if ii == i]
        for meth in MP_METHODS:
            avg, se = _mean_se([p[meth] for p in per])
            rows.append({"mu": mu, "method": meth, "mp": avg, "mc_se": se})
    return rows


def write_mp_csv(path, rows):
    write_csv(path, ["mu", "method", "mp", "mc_se"],
              ([r["mu"], r["method"], r["mp"], r["mc_se"]] for r in rows))


ORACLE_GRID = tuple((fam, tau, y) for fam in ("hs+", "hs") for tau in (1.0, 0.1) for y in (0.0, 2.0, 5.0))


def run_oracle_agreement(grid=ORACLE_GRID, retained=10_000, seed=20150401, threads=1):
    """Single-observation Gibbs runs against the quadrature posterior means.

    Each ``(family, tau, y)`` cell runs one chain with fixed ``tau``, equal
    burn-in and retained lengths, and replicate index equal to its position
    in ``grid``.

    Returns
    -------
    list of dict
        Keys ``family, tau, y`` and, for ``theta`` and ``kappa``, the sampler
        mean, the quadrature value, the batch-means MCSE and ``|z|``.
    """
    grid = list(grid)

    def one(k):
        fam, tau, y = grid[k]
        cfg = McmcConfig(iterations=2 * retained, burn_in=retained, seed=seed,
                         tau_policy=TauPolicy.fixed(tau))
        res = run_gibbs(np.array([float(y)]), fam, cfg, replicate=k)
        kp = KappaPosterior(y, PriorSpec(fam, tau))
        row = {"family": fam, "tau": float(tau), "y": float(y)}
        for name, draws, exact in (("theta", res.theta, kp.theta_mean()), ("kappa", res.kappa, kp.mean())):
            est = float(np.mean(draws))
            se = float(batch_means_mcse(draws)[0])
            row.update({f"{name}_mcmc": est, f"{name}_quad": exact, f"{name}_mcse": se,
                        f"{name}_z": abs(est - exact) / se})
        return row

    return _pool_map(one, list(range(len(grid))), threads)


ORACLE_COLUMNS = ["family", "tau", "y", "theta_mcmc", "theta_quad", "theta_mcse", "theta_z",
                  "kappa_mcmc", "kappa_quad", "kappa_mcse", "kappa_z"]


def write_oracle_csv(path, rows):
    write_csv(path, ORACLE_COLUMNS, ([r[c] for c in ORACLE_COLUMNS] for r in rows))


def r_spike(n, r):
    """``r`` coordinates of magnitude ``sqrt(n/r)``, the rest zero."""
    theta = np.zeros(n)
    theta[:r] = math.sqrt(n / r)
    return theta


def james_stein_risk(theta, replicates, seed=0):
    """Monte Carlo risk ``E||theta_JS(y) - theta||^2`` of ``(1 - (n-2)/||y||^2) y``.

    Returns
    -------
    (risk, mc_se)
    """
    theta = np.asarray(theta, dtype=float)
    n = theta.size
    if n <= 2:
        raise DomainError("James-Stein needs n > 2")
    rng = data_generator(seed, 0)
    losses = np.empty(replicates)
    chunk = 10_000
    for start in range(0, replicates, chunk):
        m = min(chunk, replicates - start)
        y = theta + rng.standard_normal((m, n))
        shrink = 1.0 - (n - 2) / np.sum(y * y, axis=1)
        losses[start:start + m] = np.sum((shrink[:, None] * y - theta) ** 2, axis=1)
    return _mean_se(losses)


def kl_divergence_normal_shift(theta0, theta):
    """``K(N(theta0, 1), N(theta, 1)) = (theta - theta0)^2 / 2``."""
    return 0.5 * (float(theta) - float(theta0)) ** 2


def kl_risk_bound(spec, n, epsilon=None):
    """Cesaro-average Kullback-Leibler risk bound ``epsilon - log(nu(A_epsilon)) / n`` at ``theta0 = 0``.

    ``A_epsilon = {|theta| <= sqrt(2 epsilon)}`` and ``nu`` is the prior. The
    default ``epsilon`` is ``1/n``.
    """
    spec.require_unit_tau("kl_risk_bound")
    if n < 2:
        raise DomainError("n must be at least 2")
    eps = 1.0 / n if epsilon is None else float(epsilon)
    if not eps > 0.0:
        raise DomainError("epsilon must be positive")
    return eps - math.log(central_mass(spec, math.sqrt(2.0 * eps))) / n
