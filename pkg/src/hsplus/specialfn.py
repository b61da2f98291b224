"""Scalar special functions used throughout the package.

Thin, domain-checked wrappers around :mod:`scipy.special`. Inputs may be
scalars or arrays; scalars come back as Python floats.
"""

import math

import numpy as np
from scipy import special

from .exceptions import DomainError

EULER_GAMMA = 0.57721566490153286060651209
PI = math.pi

__all__ = [
    "EULER_GAMMA",
    "PI",
    "std_normal_pdf",
    "std_normal_cdf",
    "std_normal_sf",
    "std_normal_quantile",
    "erfc",
    "exp_integral_e1",
    "student_t_cdf",
]


def _out(x):
    return float(x) if np.ndim(x) == 0 else x


def std_normal_pdf(x):
    x = np.asarray(x, dtype=float)
    return _out(np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi))


def std_normal_cdf(x):
    return _out(special.ndtr(np.asarray(x, dtype=float)))


def std_normal_sf(x):
    """Upper tail 1 - Phi(x), accurate for large positive x."""
    return _out(special.ndtr(-np.asarray(x, dtype=float)))


def std_normal_quantile(p):
    """Inverse of :func:`std_normal_cdf` on the open interval (0, 1)."""
    p = np.asarray(p, dtype=float)
    if np.any(~(p > 0.0) | ~(p < 1.0)):
        raise DomainError("normal quantile requires 0 < p < 1")
    return _out(special.ndtri(p))


def erfc(x):
    x = np.asarray(x, dtype=float)
    if not np.all(np.isfinite(x)):
        raise DomainError("erfc requires finite input")
    return _out(special.erfc(x))


def exp_integral_e1(x):
    """Exponential integral E1(x) = int_x^inf exp(-t)/t dt for x > 0."""
    x = np.asarray(x, dtype=float)
    if np.any(~(x > 0.0)):
        raise DomainError("E1 requires x > 0")
    return _out(special.exp1(x))


def student_t_cdf(t, df):
    """CDF of Student's t distribution with ``df`` degrees of freedom."""
    df = np.asarray(df, dtype=float)
    if np.any(~(df >= 1.0)):
        raise DomainError("degrees of freedom must be >= 1")
    return _out(special.stdtr(df, np.asarray(t, dtype=float)))
