"""Posterior of the shrinkage weight ``kappa`` for a single observation ``y ~ N(theta, 1)``.

Every kappa integral is taken on ``t = logit(kappa)``. With ``t* = -2 log tau``
the horseshoe+ factor becomes ``(t* - t) / (kappa tau^2 expm1(t* - t))``, which
is smooth through ``kappa* = 1/(1 + tau^2)``, and the transformed integrand
``kappa^(p+1) (1-kappa)^(1/2) exp(-kappa y^2/2) J`` decays exponentially at both
ends.

The marginal data density ``m(y)`` and its derivatives are computed separately
on ``v = log(lambda)`` from the lambda prior, so the Tweedie identities
``E(theta|y) = y + d/dy log m`` and ``Var(theta|y) = 1 + d2/dy2 log m`` compare
two unrelated quadratures.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import optimize, special

from . import _backend
from .exceptions import DomainError
from .priors import PriorSpec, lambda_density
from .quadrature import integrate_1d

__all__ = [
    "KappaPosterior",
    "ConcentrationBound",
    "posterior_density",
    "posterior_mean_kappa",
    "posterior_mean_kappa_batch",
    "tail_probability",
    "concentration_constant",
    "concentration_bound",
    "marginal_data_density",
    "log_marginal_derivatives",
    "posterior_mse",
    "posterior_theta_cdf",
    "shrinkage_threshold",
]

KAPPA_EPSREL = 1e-12


def _jacobian_logit(is_plus, t, t_star, tau2, k, om):
    if not is_plus:
        return 1.0 / (om + k * tau2)
    s = t_star - t
    ratio = 1.0 if s == 0.0 else s / math.expm1(s)
    return ratio / (k * tau2)


class KappaPosterior:
    """Posterior of ``kappa`` given one observation ``y`` and a fixed prior.

    Parameters
    ----------
    y : float
        Observation.
    spec : PriorSpec
        Prior family and global scale.

    Notes
    -----
    The normalizer ``Z = int_0^1 (1-kappa)^(-1/2) exp(-kappa y^2/2) J(kappa) dkappa``
    is computed once at construction; it decays only like ``y^-2`` so it is
    stored on the natural scale.
    """

    def __init__(self, y, spec):
        y = float(y)
        if not math.isfinite(y):
            raise DomainError("y must be finite")
        self.y = y
        self.spec = spec
        self._tau2 = spec.tau ** 2
        self._t_star = -2.0 * math.log(spec.tau)
        self._half_y2 = 0.5 * y * y
        knots = [self._t_star, 0.0]
        if y != 0.0:
            knots.append(math.log(2.0 / (y * y)))
        self._knots = tuple(knots)
        self._t_lo = min(-60.0, min(knots) - 40.0)
        self._t_hi = max(80.0, self._t_star + 60.0)
        self.normalizer = self._integral(0)

    def _integrand(self, t, power):
        k = special.expit(t)
        om = special.expit(-t)
        e = k * self._half_y2
        if e > 745.0:
            return 0.0
        j = _jacobian_logit(self.spec.is_plus, t, self._t_star, self._tau2, k, om)
        return k ** (power + 1) * math.sqrt(om) * math.exp(-e) * j

    def _integral(self, power, lo=None, hi=None):
        lo = self._t_lo if lo is None else lo
        hi = self._t_hi if hi is None else hi
        if hi <= lo:
            return 0.0
        val, _ = integrate_1d(self._integrand, lo, hi, points=self._knots, args=(power,),
                              epsabs=0.0, epsrel=KAPPA_EPSREL)
        return val

    def density(self, kappa):
        """Normalized posterior density at ``kappa``."""
        kappa = float(kappa)
        if not 0.0 < kappa < 1.0:
            raise DomainError("kappa must lie strictly inside (0, 1)")
        t = special.logit(kappa)
        om = 1.0 - kappa
        j = _jacobian_logit(self.spec.is_plus, t, self._t_star, self._tau2, kappa, om)
        return math.exp(-kappa * self._half_y2) * j / math.sqrt(om) / self.normalizer

    def moment(self, power):
        """``E(kappa^power | y)``."""
        if power == 0:
            return 1.0
        return self._integral(power) / self.normalizer

    def mean(self):
        return self.moment(1)

    def theta_mean(self):
        """``E(theta | y) = (1 - E(kappa | y)) y``."""
        return (1.0 - self.mean()) * self.y

    def theta_variance(self):
        """``Var(theta | y) = E(1 - kappa) + y^2 Var(kappa)``."""
        m1 = self.mean()
        return 1.0 - m1 + self.y ** 2 * (self.moment(2) - m1 * m1)

    def mse_from_moments(self):
        """Posterior expected squared error about ``y``: ``1 - E kappa + y^2 E kappa^2``."""
        return 1.0 - self.mean() + self.y ** 2 * self.moment(2)

    def below(self, epsilon):
        """``P(kappa < epsilon | y)``."""
        _check_open_unit(epsilon, "epsilon")
        return self._integral(0, hi=float(special.logit(epsilon))) / self.normalizer

    def above(self, eta):
        """``P(kappa > eta | y)``."""
        _check_open_unit(eta, "eta")
        return self._integral(0, lo=float(special.logit(eta))) / self.normalizer

    def theta_cdf(self, x):
        """``P(theta <= x | y)``, mixing ``N((1-kappa) y, 1-kappa)`` over the kappa posterior."""
        x = float(x)
        y = self.y

        def f(t):
            om = special.expit(-t)
            z = (x - om * y) / math.sqrt(om)
            return self._integrand(t, 0) * special.ndtr(z)

        val, _ = integrate_1d(f, self._t_lo, self._t_hi, points=self._knots,
                              epsabs=1e-14, epsrel=1e-11)
        return min(1.0, max(0.0, val / self.normalizer))


def _check_open_unit(value, name):
    if not 0.0 < value < 1.0:
        raise DomainError(f"{name} must lie strictly inside (0, 1), got {value}")


def posterior_density(kp, kappa):
    return kp.density(kappa)


def posterior_mean_kappa(kp):
    """``E(kappa | y, tau)`` by adaptive quadrature."""
    return kp.mean()


def posterior_mean_kappa_batch(y, spec):
    """Vectorized ``E(kappa | y, tau)`` on a fixed composite Gauss-Legendre rule.

    Always runs the numpy kernel: its vectorized ``exp`` outpaces the scalar
    compiled loop (see ``benchmarks/bench_kernels.py``). Agrees with
    :func:`posterior_mean_kappa` to about 1e-10 for ``|y| <= 40``.
    """
    y = np.ascontiguousarray(np.abs(np.asarray(y, dtype=float)).ravel())
    if not np.all(np.isfinite(y)):
        raise DomainError("y must be finite")
    nodes_k, weights = _batch_rule(spec)
    return _backend.kernels("numpy").batch_kappa_mean(y, nodes_k, weights)


_RULE_CACHE = {}


def _batch_rule(spec):
    key = (spec.family, spec.tau)
    rule = _RULE_CACHE.get(key)
    if rule is not None:
        return rule
    t_star = -2.0 * math.log(spec.tau)
    lo = min(-60.0, t_star - 40.0)
    hi = max(80.0, t_star + 60.0)
    width = 0.25
    m = int(math.ceil((hi - lo) / width))
    edges = lo + width * np.arange(m + 1)
    gl_x, gl_w = np.polynomial.legendre.leggauss(8)
    half = 0.5 * width
    t = ((edges[:-1] + half)[:, None] + half * gl_x[None, :]).ravel()
    w = np.tile(gl_w * half, m)
    k = special.expit(t)
    om = special.expit(-t)
    tau2 = spec.tau ** 2
    if spec.is_plus:
        s = t_star - t
        small = np.abs(s) < 1e-12
        ratio = np.where(small, 1.0, s / np.where(small, 1.0, np.expm1(s)))
        jac = ratio / (k * tau2)
    else:
        jac = 1.0 / (om + k * tau2)
    weights = w * k * np.sqrt(om) * jac
    keep = weights > 0.0
    rule = (np.ascontiguousarray(k[keep]), np.ascontiguousarray(weights[keep]))
    _RULE_CACHE[key] = rule
    return rule


def tail_probability(kp, side, threshold):
    """Posterior tail mass of ``kappa``.

    ``side="below"`` gives ``P(kappa < threshold)``, ``side="above"`` gives
    ``P(kappa > threshold)``.
    """
    side = str(side).lower()
    if side == "below":
        return kp.below(threshold)
    if side == "above":
        return kp.above(threshold)
    raise ValueError(f"side must be 'below' or 'above', got {side!r}")


@dataclass(frozen=True)
class ConcentrationBound:
    """Parameters of an analytic concentration bound.

    ``epsilon`` is used by the left-tail bound, ``eta`` and ``delta`` by the
    right-tail bound.
    """

    epsilon: float = None
    eta: float = None
    delta: float = None


def concentration_constant(eta, delta):
    """``C(eta, delta) = (sqrt(1-eta) + artanh(sqrt(1-eta))) / (1/sqrt(1-eta delta) - 1)``."""
    _check_open_unit(eta, "eta")
    _check_open_unit(delta, "delta")
    r = math.sqrt(1.0 - eta)
    return (r + math.atanh(r)) / (1.0 / math.sqrt(1.0 - eta * delta) - 1.0)


def concentration_bound(kind, y, spec, params):
    """Analytic right-hand side of a kappa tail inequality.

    ``kind="left"``: ``exp(y^2/2) tau^2 eps / (1-eps)^2`` bounding ``P(kappa < eps)``.
    ``kind="right"``: ``exp(-eta (1-delta) y^2/2) C(eta, delta) / tau^2`` bounding
    ``P(kappa > eta)``, valid for ``delta < 1/(eta (1 + tau^2))``.
    """
    kind = str(kind).lower()
    tau2 = spec.tau ** 2
    y2 = float(y) ** 2
    if kind == "left":
        eps = params.epsilon
        _check_open_unit(eps, "epsilon")
        return math.exp(0.5 * y2) * tau2 * eps / (1.0 - eps) ** 2
    if kind == "right":
        eta, delta = params.eta, params.delta
        _check_open_unit(eta, "eta")
        _check_open_unit(delta, "delta")
        if not delta < 1.0 / (eta * (1.0 + tau2)):
            raise DomainError("delta must be below 1/(eta (1 + tau^2))")
        return math.exp(-0.5 * eta * (1.0 - delta) * y2) * concentration_constant(eta, delta) / tau2
    raise ValueError(f"kind must be 'left' or 'right', got {kind!r}")


# ----------------------------------------------------------------------------
# Marginal data density on the lambda scale
# ----------------------------------------------------------------------------

def _lambda_moments(y, spec):
    """(m, m', m'') with m(y) = int N(y; 0, 1 + lambda^2) p(lambda) dlambda."""
    y = float(y)
    if not math.isfinite(y):
        raise DomainError("y must be finite")
    log_tau = math.log(spec.tau)
    knots = [log_tau, 0.0]
    if abs(y) > 1.0:
        knots.append(math.log(abs(y)))
    lo = min(knots) - 45.0
    hi = max(knots) + 45.0
    y2 = y * y

    def base(v):
        lam = math.exp(v)
        s2 = 1.0 + lam * lam
        e = 0.5 * y2 / s2
        if e > 745.0:
            return 0.0, s2
        return math.exp(-e) / math.sqrt(2.0 * math.pi * s2) * lambda_density(spec, lam) * lam, s2

    def f0(v):
        return base(v)[0]

    def f1(v):
        b, s2 = base(v)
        return -y / s2 * b

    def f2(v):
        b, s2 = base(v)
        k = 1.0 / s2
        return (k * k * y2 - k) * b

    out = []
    for f in (f0, f1, f2):
        val, _ = integrate_1d(f, lo, hi, points=knots, epsabs=0.0, epsrel=1e-12)
        out.append(val)
    return tuple(out)


def marginal_data_density(y, spec):
    """Marginal density of ``y`` with ``theta`` integrated against the prior."""
    return _lambda_moments(y, spec)[0]


def log_marginal_derivatives(y, spec):
    """First and second derivatives of ``log m(y)``, differentiated under the integral."""
    m0, m1, m2 = _lambda_moments(y, spec)
    g = m1 / m0
    return g, m2 / m0 - g * g


def posterior_mse(y, spec):
    """Posterior expected squared error of ``y`` as an estimate of ``theta``.

    Equals ``bias^2 + variance`` with ``bias = d/dy log m`` and
    ``variance = 1 + d2/dy2 log m``, which simplifies to ``1 + m''/m``.
    """
    m0, _, m2 = _lambda_moments(y, spec)
    return 1.0 + m2 / m0


def posterior_theta_cdf(y, spec, x):
    return KappaPosterior(y, spec).theta_cdf(x)


def shrinkage_threshold(spec, level=0.5):
    """Smallest ``|y|`` at which ``1 - E(kappa | y)`` reaches ``level``.

    ``1 - E(kappa | y)`` increases in ``|y|``, so ``reject iff |y| > threshold``
    reproduces the rule ``1 - E(kappa | y) > level``. Returns 0 when the rule
    already rejects at ``y = 0``.
    """
    _check_open_unit(level, "level")

    def g(y):
        return 1.0 - KappaPosterior(y, spec).mean() - level

    if g(0.0) >= 0.0:
        return 0.0
    hi = 2.0
    while g(hi) < 0.0:
        hi *= 2.0
        if hi > 1e4:
            raise DomainError("shrinkage threshold not found below |y| = 1e4")
    return optimize.brentq(g, 0.0, hi, xtol=1e-12, rtol=1e-13)
