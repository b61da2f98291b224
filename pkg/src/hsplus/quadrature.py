"""Adaptive Gauss-Kronrod integration with a hard panel budget.

Wraps QUADPACK (``scipy.integrate.quad``) so that failure to reach the
requested tolerance raises :class:`ToleranceNotMet` instead of warning.
Callers are expected to map infinite ranges and endpoint singularities
onto finite, smooth integrands before calling in here.
"""

import warnings

from scipy import integrate

from .exceptions import ToleranceNotMet

EPSABS = 1e-9
EPSREL = 1e-9
PANEL_LIMIT = 400


def integrate_1d(f, a, b, *, points=None, epsabs=EPSABS, epsrel=EPSREL,
                 limit=PANEL_LIMIT, args=()):
    """Integrate ``f`` over the finite interval [a, b].

    Returns
    -------
    value, abserr : float
    """
    if points is not None:
        points = sorted(p for p in set(points) if a < p < b) or None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        value, abserr, info, *message = integrate.quad(
            f, a, b, args=args, points=points, epsabs=epsabs, epsrel=epsrel,
            limit=limit, full_output=1)
    tol = max(epsabs, epsrel * abs(value))
    # QUADPACK flags roundoff even when the error estimate is well inside tol.
    if abserr > 10.0 * tol:
        raise ToleranceNotMet(
            f"quadrature on [{a:g}, {b:g}] stopped at abserr={abserr:.3g} "
            f"(tolerance {tol:.3g}, {info['last']} panels)"
            + (f": {message[0].splitlines()[0]}" if message else ""))
    return value, abserr
