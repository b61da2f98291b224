"""Multiple-testing rules for sparse normal means.

Covers the half-threshold shrinkage rule, the two-groups Bayes oracle with its
asymptotic error rates, Benjamini-Hochberg, asymptotic error bounds for the
shrinkage rule, and 0-1 loss scoring.

Two-groups model: ``theta_i = 0`` with probability ``1 - mu``, otherwise
``theta_i ~ N(0, psi^2)``; ``y_i | theta_i ~ N(theta_i, 1)``.
"""

import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._io import write_csv
from .exceptions import DegenerateOracle, DomainError
from .specialfn import std_normal_cdf, std_normal_sf

__all__ = [
    "half_threshold_rule",
    "OracleParams",
    "OracleThreshold",
    "OracleRates",
    "oracle_threshold",
    "oracle_threshold_direct",
    "oracle_error_rates",
    "oracle_exact_error_rates",
    "benjamini_hochberg",
    "two_sided_pvalues",
    "default_bh_alpha",
    "analytic_error_bounds",
    "DecisionReport",
    "score",
    "write_decisions_csv",
]


def half_threshold_rule(summary_or_omega, level=0.5):
    """Reject where the pseudo-inclusion probability ``omega = 1 - E(kappa|y)`` exceeds ``level``.

    Accepts a posterior summary (anything with an ``omega`` attribute) or an
    array of ``omega`` values. Ties are accepted.
    """
    omega = getattr(summary_or_omega, "omega", summary_or_omega)
    return np.asarray(omega, dtype=float) > level


@dataclass(frozen=True)
class OracleParams:
    """Two-groups parameters ``mu`` (signal fraction) and ``psi_sq`` (signal variance)."""

    mu: float
    psi_sq: float

    def __post_init__(self):
        if not 0.0 < self.mu < 1.0:
            raise DomainError("mu must lie in (0, 1)")
        if not (self.psi_sq > 0.0 and math.isfinite(self.psi_sq)):
            raise DomainError("psi_sq must be positive")

    @property
    def u(self):
        return self.psi_sq

    @property
    def f(self):
        return (1.0 - self.mu) / self.mu

    @property
    def v(self):
        return self.psi_sq * self.f ** 2

    @property
    def log_v(self):
        return math.log(self.psi_sq) + 2.0 * math.log(self.f)

    @property
    def c_constant(self):
        """Finite-n plug-in ``C = log(v) / u`` of the asymptotic detectability constant."""
        return self.log_v / self.u


class OracleThreshold(NamedTuple):
    c_squared: float
    c: float

    def reject(self, y):
        return np.abs(np.asarray(y, dtype=float)) > self.c


class OracleRates(NamedTuple):
    t1: float
    t2: float
    risk_per_test: float
    mp: float


def oracle_threshold(p):
    """Bayes-oracle threshold ``C^2 = (1 + 1/u)(log v + log(1 + 1/u))``; reject ``|y| > C``.

    Raises
    ------
    DegenerateOracle
        If ``C^2 <= 0``. This needs ``v < 1``; ``v = 1`` still gives
        ``C^2 = (1 + 1/u) log(1 + 1/u) > 0``.
    """
    inv_u = 1.0 / p.u
    c2 = (1.0 + inv_u) * (p.log_v + math.log1p(inv_u))
    if c2 <= 0.0:
        raise DegenerateOracle(f"v = {p.v:g}: the oracle threshold is not positive")
    return OracleThreshold(c2, math.sqrt(c2))


def oracle_threshold_direct(mu, psi_sq):
    """Same threshold in the ``(mu, psi^2)`` form ``(1+psi^2)/psi^2 (log(1+psi^2) + 2 log f)``."""
    f = (1.0 - mu) / mu
    return (1.0 + psi_sq) / psi_sq * (math.log1p(psi_sq) + 2.0 * math.log(f))


def oracle_error_rates(p, c=None):
    """Leading-order oracle error rates.

    ``t1 = exp(-C/2) sqrt(2/(pi v log v))``, ``t2 = 2 Phi(sqrt C) - 1`` and
    ``risk_per_test = mu t2``, with ``C`` the detectability constant
    (default ``log(v)/u``). ``mp`` is ``(1 - mu) t1 + mu t2``.
    """
    if p.v <= 1.0:
        raise DegenerateOracle(f"v = {p.v:g} <= 1")
    c = p.c_constant if c is None else float(c)
    if not c > 0.0:
        raise DegenerateOracle("detectability constant must be positive")
    t1 = math.exp(-0.5 * c) * math.sqrt(2.0 / (math.pi * p.v * p.log_v))
    t2 = 2.0 * std_normal_cdf(math.sqrt(c)) - 1.0
    return OracleRates(t1, t2, p.mu * t2, (1.0 - p.mu) * t1 + p.mu * t2)


def oracle_exact_error_rates(p):
    """Exact error rates of the rule ``|y| > C`` under the two-groups model."""
    thr = oracle_threshold(p)
    t1 = 2.0 * std_normal_sf(thr.c)
    t2 = 2.0 * std_normal_cdf(thr.c / math.sqrt(1.0 + p.psi_sq)) - 1.0
    mp = (1.0 - p.mu) * t1 + p.mu * t2
    return OracleRates(t1, t2, p.mu * t2, mp)


def two_sided_pvalues(z):
    """``2 (1 - Phi(|z|))``, computed with the survival function."""
    return 2.0 * std_normal_sf(np.abs(np.asarray(z, dtype=float)))


def default_bh_alpha(n):
    """``1 / log n``."""
    if n < 2:
        raise DomainError("n must be at least 2")
    return 1.0 / math.log(n)


def benjamini_hochberg(pvalues, alpha):
    """Benjamini-Hochberg step-up rule.

    Rejects the ``k`` smallest p-values, where ``k`` is the largest index with
    ``p_(k) <= k alpha / n``.
    """
    p = np.asarray(pvalues, dtype=float).ravel()
    if p.size == 0:
        return np.zeros(0, dtype=bool)
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if np.any((p < 0.0) | (p > 1.0) | ~np.isfinite(p)):
        raise DomainError("p-values must lie in [0, 1]")
    n = p.size
    order = np.argsort(p, kind="stable")
    passed = p[order] <= alpha * np.arange(1, n + 1) / n
    reject = np.zeros(n, dtype=bool)
    if passed.any():
        k = int(np.nonzero(passed)[0][-1]) + 1
        reject[order[:k]] = True
    return reject


def analytic_error_bounds(spec, p, eta, delta, c=None):
    """Leading-order bounds on the shrinkage rule's error rates.

    ``t1 <= sqrt(2/pi) tau^2 / sqrt(log(1/(2 tau)))`` and
    ``t2 <= 2 Phi(sqrt(2/(eta (1-delta))) sqrt C) - 1``.

    Parameters
    ----------
    spec : PriorSpec
        Supplies ``tau``, which must lie in (0, 1/2).
    p : OracleParams
        Supplies ``C = log(v)/u`` unless ``c`` is given.
    eta, delta : float
        In (0, 1).
    """
    tau = spec.tau
    if not 0.0 < tau < 0.5:
        raise DomainError("the type-I bound needs tau in (0, 1/2)")
    if not (0.0 < eta < 1.0 and 0.0 < delta < 1.0):
        raise DomainError("eta and delta must lie in (0, 1)")
    c = p.c_constant if c is None else float(c)
    t1 = math.sqrt(2.0 / math.pi) * tau * tau / math.sqrt(math.log(1.0 / (2.0 * tau)))
    t2 = 2.0 * std_normal_cdf(math.sqrt(2.0 / (eta * (1.0 - delta))) * math.sqrt(c)) - 1.0
    return t1, t2


@dataclass
class DecisionReport:
    """Error rates of a reject vector against the truth; ``nan`` marks an undefined rate."""

    reject: np.ndarray
    t1: float
    t2: float
    mp: float
    risk: float


def score(decisions, truth):
    """Type-I rate, type-II rate and misclassification probability."""
    d = np.asarray(decisions, dtype=bool).ravel()
    t = np.asarray(truth).ravel() != 0
    if d.shape != t.shape:
        raise DomainError("decisions and truth must have equal length")
    n = d.size
    nulls = int(np.sum(~t))
    signals = int(np.sum(t))
    false_rej = int(np.sum(d & ~t))
    misses = int(np.sum(~d & t))
    t1 = false_rej / nulls if nulls else float("nan")
    t2 = misses / signals if signals else float("nan")
    errors = false_rej + misses
    return DecisionReport(d, t1, t2, errors / n if n else float("nan"), float(errors))


def write_decisions_csv(path, y, omega, reject, truth=None):
    """Rows ``index,y,omega_hat,reject,truth`` (truth empty when unknown)."""
    y = np.asarray(y, dtype=float)
    omega = np.asarray(omega, dtype=float)
    reject = np.asarray(reject, dtype=bool)
    rows = []
    for i in range(y.size):
        tr = "" if truth is None else int(np.asarray(truth).ravel()[i] != 0)
        rows.append((i + 1, y[i], omega[i], bool(reject[i]), tr))
    write_csv(path, ["index", "y", "omega_hat", "reject", "truth"], rows)
