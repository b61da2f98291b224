"""Horseshoe and horseshoe+ prior densities on the lambda, kappa and theta scales.

Conventions
-----------
``theta | lambda ~ N(0, lambda^2)`` with ``lambda ~ C+(0, tau)`` (horseshoe) or
``lambda | eta ~ C+(0, tau * eta)``, ``eta ~ C+(0, 1)`` (horseshoe+). The
shrinkage weight is ``kappa = 1 / (1 + lambda^2)``, so ``tau`` enters the kappa
prior explicitly rather than through a rescaled local variable.

The theta marginals have no elementary closed form. With ``zeta = 1/lambda^2``
(unit global scale) they are Laplace transforms

    p_HS(theta)  = 1/(pi sqrt(2 pi))   int_0^inf exp(-zeta theta^2/2) / (1 + zeta) dzeta
    p_HS+(theta) = 1/(pi^2 sqrt(2 pi)) int_0^inf exp(-zeta theta^2/2) log(zeta)/(zeta - 1) dzeta

evaluated here on ``zeta = exp(s)``, where both integrands are smooth with
exponentially decaying tails.
"""

import enum
import functools
import math
from dataclasses import dataclass

import numpy as np
from scipy import interpolate

from .exceptions import DomainError, PoleAtOrigin, UnsupportedConfiguration
from .quadrature import integrate_1d
from .specialfn import EULER_GAMMA

__all__ = [
    "Family",
    "PriorSpec",
    "DensityBounds",
    "lambda_density",
    "kappa_jacobian",
    "kappa_prior_density",
    "marginal_theta_density",
    "marginal_bounds",
    "asymptotic_expansion",
    "origin_mass",
    "central_mass",
    "slowly_varying_component",
    "cauchy_product_density",
    "cauchy_product_cdf",
    "log_star",
    "universal_prior_constant",
    "universal_prior_mass",
]

SQRT_2PI = math.sqrt(2.0 * math.pi)
LOG2 = math.log(2.0)
# Relative distance from a removable singularity inside which the limit is used.
SINGULAR_RTOL = 1e-6


class Family(str, enum.Enum):
    HORSESHOE = "hs"
    HORSESHOE_PLUS = "hs+"

    @classmethod
    def parse(cls, value):
        if isinstance(value, cls):
            return value
        key = str(value).strip().lower().replace("_", "").replace("-", "")
        aliases = {
            "hs": cls.HORSESHOE, "horseshoe": cls.HORSESHOE,
            "hs+": cls.HORSESHOE_PLUS, "hsplus": cls.HORSESHOE_PLUS,
            "horseshoe+": cls.HORSESHOE_PLUS, "horseshoeplus": cls.HORSESHOE_PLUS,
        }
        try:
            return aliases[key]
        except KeyError:
            raise ValueError(f"unknown prior family {value!r}; use 'hs' or 'hs+'") from None

    @property
    def label(self):
        return "HS+" if self is Family.HORSESHOE_PLUS else "HS"


@dataclass(frozen=True)
class PriorSpec:
    """Prior family together with a fixed global scale ``tau``."""

    family: Family
    tau: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "family", Family.parse(self.family))
        if not (math.isfinite(self.tau) and self.tau > 0.0):
            raise DomainError(f"tau must be positive and finite, got {self.tau}")

    @property
    def is_plus(self):
        return self.family is Family.HORSESHOE_PLUS

    def require_unit_tau(self, what):
        if self.tau != 1.0:
            raise UnsupportedConfiguration(f"{what} is only available for tau = 1")


@dataclass(frozen=True)
class DensityBounds:
    lower: float
    upper: float

    def contains(self, value):
        """Strict lower, inclusive upper, as in the marginal bound statement."""
        return self.lower < value <= self.upper


def _scalar_or_array(x):
    return float(x) if np.ndim(x) == 0 else x


def _log_ratio(x, d=None, logx=None):
    """log(x) / (x - 1) for x > 0, with the limit 1 at x = 1.

    ``d`` may carry an accurately computed ``x - 1``; ``log1p(d)`` is used near
    ``x = 1`` and ``log(x)`` elsewhere, where ``x - 1`` can round to -1.
    ``logx`` supplies ``log(x)`` when ``x`` itself under- or overflows.
    """
    x = np.asarray(x, dtype=float)
    d = x - 1.0 if d is None else np.asarray(d, dtype=float)
    near = np.abs(d) < SINGULAR_RTOL
    mid = np.abs(d) <= 0.5
    safe_d = np.where(near, 1.0, d)
    with np.errstate(divide="ignore", invalid="ignore", over="ignore"):
        lx = np.log(np.where(mid, 1.0, x)) if logx is None else np.where(mid, 0.0, logx)
        far = lx / np.where(mid, 1.0, d)
        close = np.log1p(np.where(mid, safe_d, 0.0)) / np.where(mid, safe_d, 1.0)
        series = 1.0 - 0.5 * d + d * d / 3.0
    out = np.where(near, series, np.where(mid, close, far))
    # x = inf: log(x)/(x - 1) -> 0
    return np.where(np.isinf(x), 0.0, out)


# ----------------------------------------------------------------------------
# lambda and kappa scales
# ----------------------------------------------------------------------------

def lambda_density(spec, lam):
    """Prior density of the local scale ``lambda`` given ``tau``."""
    lam = np.asarray(lam, dtype=float)
    if np.any(~(lam > 0.0)):
        raise DomainError("lambda must be positive")
    tau = spec.tau
    r = lam / tau
    if spec.is_plus:
        # log(r) / (r^2 - 1) = 0.5 * log(r^2) / (r^2 - 1)
        with np.errstate(over="ignore", under="ignore"):
            r2 = r * r
            out = 4.0 / (math.pi ** 2 * tau) * 0.5 * _log_ratio(r2, logx=2.0 * np.log(r))
    else:
        out = 2.0 / (math.pi * tau * (1.0 + r * r))
    return _scalar_or_array(out)


def kappa_jacobian(spec, kappa):
    """Shrinkage-profile factor of the kappa prior beyond the Beta(1/2, 1/2) kernel.

    Horseshoe: ``1 / (1 + kappa (tau^2 - 1))``. Horseshoe+:
    ``log((1 - kappa)/(kappa tau^2)) / (1 - kappa (1 + tau^2))``, equal to
    ``(1 + tau^2)/tau^2`` at ``kappa = 1/(1 + tau^2)``.
    """
    kappa = np.asarray(kappa, dtype=float)
    tau2 = spec.tau ** 2
    if not spec.is_plus:
        return _scalar_or_array(1.0 / (1.0 + kappa * (tau2 - 1.0)))
    ktau = kappa * tau2
    x = (1.0 - kappa) / ktau
    d = (1.0 - kappa * (1.0 + tau2)) / ktau
    return _scalar_or_array(_log_ratio(x, d) / ktau)


def _check_unit_interval(kappa):
    kappa = np.asarray(kappa, dtype=float)
    if np.any(~(kappa > 0.0) | ~(kappa < 1.0)):
        raise DomainError("kappa must lie strictly inside (0, 1)")
    return kappa


def kappa_prior_density(spec, kappa, normalized=True):
    """Prior density of the shrinkage weight ``kappa``.

    With ``normalized=False`` the unnormalized table form
    ``tau / sqrt(kappa (1 - kappa)) * jacobian`` is returned; the normalizing
    constants are ``1/pi`` (horseshoe) and ``1/pi^2`` (horseshoe+).
    """
    kappa = _check_unit_interval(kappa)
    raw = spec.tau / np.sqrt(kappa * (1.0 - kappa)) * kappa_jacobian(spec, kappa)
    if normalized:
        raw = raw / (math.pi ** 2 if spec.is_plus else math.pi)
    return _scalar_or_array(raw)


# ----------------------------------------------------------------------------
# theta scale
# ----------------------------------------------------------------------------

def _mixing_weight(is_plus, s):
    """zeta-weight times the Jacobian exp(s) of zeta = exp(s)."""
    if is_plus:
        # zeta log(zeta)/(zeta - 1) = s / (1 - exp(-s))
        if s == 0.0:
            return 1.0
        return s / -math.expm1(-s)
    return 1.0 / (1.0 + math.exp(-s)) if s > -700.0 else math.exp(s)


def _unit_laplace(is_plus, a):
    """int_0^inf exp(-a zeta) w(zeta) dzeta for a = theta^2/2 > 0."""
    s_decay = -math.log(a)
    s_lo = min(-40.0, s_decay - 40.0)
    s_hi = s_decay + math.log(80.0)

    def f(s):
        e = a * math.exp(s)
        return math.exp(-e) * _mixing_weight(is_plus, s) if e < 745.0 else 0.0

    val, _ = integrate_1d(f, s_lo, s_hi, points=(s_decay, 0.0), epsabs=0.0, epsrel=1e-11)
    return val


def _unit_marginal(is_plus, theta):
    a = 0.5 * theta * theta
    const = 1.0 / (math.pi ** 2 * SQRT_2PI) if is_plus else 1.0 / (math.pi * SQRT_2PI)
    return const * _unit_laplace(is_plus, a)


def marginal_theta_density(spec, theta):
    """Marginal prior density of ``theta`` by adaptive quadrature.

    Raises
    ------
    PoleAtOrigin
        At ``theta == 0``, where both marginals are unbounded.
    """
    if np.ndim(theta) > 0:
        return np.array([marginal_theta_density(spec, t) for t in np.ravel(theta)]).reshape(
            np.shape(theta))
    theta = abs(float(theta))
    if not math.isfinite(theta):
        raise DomainError("theta must be finite")
    if theta == 0.0:
        raise PoleAtOrigin("marginal prior density is unbounded at theta = 0")
    return _unit_marginal(spec.is_plus, theta / spec.tau) / spec.tau


def marginal_bounds(spec, theta):
    """Analytic envelope of the unit-scale marginal density."""
    spec.require_unit_tau("marginal_bounds")
    theta = abs(float(theta))
    if theta == 0.0 or not math.isfinite(theta):
        raise DomainError("bounds need a finite, nonzero theta")
    t2 = theta * theta
    if spec.is_plus:
        lower = math.log1p(4.0 / t2) / (math.pi ** 2 * SQRT_2PI)
        upper = 1.0 / (math.pi ** 2 * theta)
    else:
        k = 1.0 / math.sqrt(2.0 * math.pi ** 3)
        lower = 0.5 * k * math.log1p(4.0 / t2)
        upper = k * math.log1p(2.0 / t2)
    return DensityBounds(lower, upper)


def asymptotic_expansion(spec, theta, at):
    """Leading power-log behaviour of the unit-scale marginal at 0 or infinity.

    ``at`` is ``"origin"`` or ``"infinity"``.
    """
    spec.require_unit_tau("asymptotic_expansion")
    theta = abs(float(theta))
    g = EULER_GAMMA
    at = str(at).lower()
    if at in ("origin", "zero", "0"):
        if theta == 0.0:
            raise PoleAtOrigin("expansion at the origin diverges at theta = 0")
        ell = math.log(1.0 / theta)
        if spec.is_plus:
            poly = (24.0 * ell * ell + 24.0 * (LOG2 - g) * ell + 6.0 * g * g
                    + 5.0 * math.pi ** 2 + 6.0 * LOG2 ** 2 - 12.0 * g * LOG2)
            return math.sqrt(2.0) / math.pi ** 2.5 * poly / 24.0
        return (2.0 * ell - g + LOG2) / (math.sqrt(2.0) * math.pi ** 1.5)
    if at in ("infinity", "inf"):
        if theta == 0.0:
            raise DomainError("expansion at infinity needs theta > 0")
        if spec.is_plus:
            return math.sqrt(2.0) / math.pi ** 2.5 * (2.0 * math.log(theta) + g - LOG2) / theta ** 2
        return math.sqrt(2.0) / math.pi ** 1.5 / theta ** 2
    raise ValueError(f"unknown expansion point {at!r}")


def _theta_integral(spec, lo, hi):
    """int_lo^hi p(theta) dtheta for 0 <= lo < hi < inf, on theta = exp(t)."""
    t_hi = math.log(hi)
    t_lo = math.log(lo) if lo > 0.0 else t_hi - 60.0

    def f(t):
        th = math.exp(t)
        return marginal_theta_density(spec, th) * th

    val, _ = integrate_1d(f, t_lo, t_hi, epsabs=0.0, epsrel=1e-10)
    return val


def central_mass(spec, h):
    """Prior probability ``P(|theta| <= h)`` by quadrature of the marginal density."""
    if not (h > 0.0 and math.isfinite(h)):
        raise DomainError("h must be positive and finite")
    return 2.0 * _theta_integral(spec, 0.0, float(h))


def origin_mass(spec, n, method="closed-form"):
    """One-sided prior mass near the origin, ``int_0^{1/sqrt(n)} p(theta) dtheta``.

    Methods
    -------
    closed-form
        Exact integral of the origin expansion (:func:`asymptotic_expansion`).
    leading
        Same, keeping only the terms that grow with ``n``.
    expansion-quadrature
        Numerical integral of the origin expansion.
    quadrature
        Numerical integral of the marginal density itself.
    """
    spec.require_unit_tau("origin_mass")
    if int(n) != n or n < 2:
        raise DomainError("n must be an integer >= 2")
    n = float(n)
    h = 1.0 / math.sqrt(n)
    g = EULER_GAMMA
    ln = math.log(n)
    if method == "closed-form":
        if spec.is_plus:
            body = (6.0 * ln * (ln - 2.0 * g + 4.0 + math.log(4.0)) + 6.0 * g * g
                    + 5.0 * math.pi ** 2 + 6.0 * (8.0 + LOG2 ** 2 + math.log(16.0))
                    - 12.0 * g * (2.0 + LOG2)) / 24.0
            return h * math.sqrt(2.0) / math.pi ** 2.5 * body
        return h / (math.sqrt(2.0) * math.pi ** 1.5) * (ln + 2.0 - g + LOG2)
    if method == "leading":
        if spec.is_plus:
            body = ln * ln / 4.0 + (1.0 - g / 2.0 + math.log(4.0) / 4.0) * ln
            return h * math.sqrt(2.0) / math.pi ** 2.5 * body
        return h / (math.sqrt(2.0) * math.pi ** 1.5) * ln
    if method == "expansion-quadrature":
        t_hi = math.log(h)

        def f(t):
            th = math.exp(t)
            return asymptotic_expansion(spec, th, "origin") * th

        val, _ = integrate_1d(f, t_hi - 60.0, t_hi, epsabs=0.0, epsrel=1e-11)
        return val
    if method == "quadrature":
        return _theta_integral(spec, 0.0, h)
    raise ValueError(f"unknown origin_mass method {method!r}")


def slowly_varying_component(spec, lambda_sq):
    """Slowly varying factor of the lambda^2 prior at unit global scale.

    Horseshoe+: ``log(x) / (1 - 1/x)`` (unbounded); horseshoe: ``x / (1 + x)``.
    """
    spec.require_unit_tau("slowly_varying_component")
    x = np.asarray(lambda_sq, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("lambda^2 must be positive")
    if spec.is_plus:
        out = x * _log_ratio(x)
    else:
        out = x / (1.0 + x)
    return _scalar_or_array(out)


# ----------------------------------------------------------------------------
# Products of Cauchy variables and the universal integer prior
# ----------------------------------------------------------------------------

def _cauchy_product_log_density(k, u):
    """Density of log|C_1 ... C_k| (two-sided), an even function of u."""
    u = np.asarray(u, dtype=float)
    if k % 2 == 1:
        i = (k - 1) // 2
        coef = 2.0 ** (2 * i) / (math.pi * math.factorial(2 * i))
        prod = np.ones_like(u)
        for j in range(1, i + 1):
            prod = prod * ((j - 0.5) ** 2 + (u / math.pi) ** 2)
        return 2.0 * coef * prod / (2.0 * np.cosh(u))
    i = k // 2
    coef = 2.0 ** (2 * i - 1) / (math.pi ** 2 * math.factorial(2 * i - 1))
    prod = np.ones_like(u)
    for j in range(1, i):
        prod = prod * (j * j + (u / math.pi) ** 2)
    au = np.abs(u)
    with np.errstate(over="ignore"):
        ratio = np.where(au < SINGULAR_RTOL, 0.5, au / (2.0 * np.sinh(np.maximum(au, SINGULAR_RTOL))))
    return 2.0 * coef * prod * ratio


def cauchy_product_density(k, x):
    """Density of the product of ``k`` independent standard Cauchy variables."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    k = int(k)
    x = np.asarray(x, dtype=float)
    ax = np.abs(x)
    if k >= 2 and np.any(ax == 0.0):
        raise PoleAtOrigin("Cauchy-product density is unbounded at x = 0 for k >= 2")
    if k == 1:
        return _scalar_or_array(1.0 / (math.pi * (1.0 + x * x)))
    with np.errstate(divide="ignore"):
        u = np.log(ax)
    # density of log|X| is 2 * psi(e^u) e^u (both signs of x)
    return _scalar_or_array(0.5 * _cauchy_product_log_density(k, u) / ax)


@functools.lru_cache(maxsize=16)
def _cauchy_product_log_cdf(k):
    # Cumulative integral of the log|X| density on a fine grid, 10-point
    # Gauss-Legendre per cell; interpolated with the exact derivative.
    edges = np.linspace(-80.0, 80.0, 16001)
    nodes, weights = np.polynomial.legendre.leggauss(10)
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[1:] + edges[:-1])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    cell = (weights[None, :] * _cauchy_product_log_density(k, pts)).sum(axis=1) * half
    cum = np.concatenate([[0.0], np.cumsum(cell)])
    cum /= cum[-1]
    return interpolate.CubicHermiteSpline(edges, cum, _cauchy_product_log_density(k, edges) / 1.0)


def cauchy_product_cdf(k, x):
    """CDF of the product of ``k`` standard Cauchy variables (tabulated)."""
    if int(k) != k or k < 1:
        raise DomainError("k must be a positive integer")
    x = np.asarray(x, dtype=float)
    if int(k) == 1:
        return _scalar_or_array(0.5 + np.arctan(x) / math.pi)
    spline = _cauchy_product_log_cdf(int(k))
    with np.errstate(divide="ignore"):
        u = np.clip(np.log(np.abs(x)), -80.0, 80.0)
    mass_inside = np.clip(spline(u), 0.0, 1.0)  # P(|X| <= |x|)
    return _scalar_or_array(0.5 + np.sign(x) * 0.5 * mass_inside)


def log_star(i):
    """Iterated base-2 logarithm ``log2 i + log2 log2 i + ...`` over non-negative terms."""
    total = 0.0
    x = float(i)
    while True:
        x = math.log2(x)
        if x < 0.0:
            break
        total += x
        if x == 0.0:
            break
    return total


@functools.lru_cache(maxsize=1)
def universal_prior_constant(cut=2 ** 20):
    """Normalizer ``c = sum_i 2^(-log* i)``.

    Summed exactly below ``cut``; the remainder uses the antiderivative
    ``(ln 2)^5 l5`` of the summand on ``[2^16, 2^65536)`` (``l5`` the fifth
    iterated log) plus ``(ln 2)^j`` for each further tower level.
    """
    if not 2 ** 16 < cut < 2 ** 64:
        raise DomainError("cut must lie between 2^16 and 2^64")
    head = math.fsum(2.0 ** -log_star(i) for i in range(1, cut))
    l5 = math.log2(math.log2(math.log2(math.log2(math.log2(cut)))))
    ln2 = math.log(2.0)
    tail = ln2 ** 5 * (1.0 - l5) + ln2 ** 6 / (1.0 - ln2) + 0.5 * 2.0 ** -log_star(cut)
    return head + tail


def universal_prior_mass(i):
    """Rissanen's universal prior ``Q(i) = 2^(-log* i) / c`` on positive integers."""
    if int(i) != i or i < 1:
        raise DomainError("i must be a positive integer")
    return 2.0 ** -log_star(int(i)) / universal_prior_constant()
