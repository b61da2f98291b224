import math

import pytest

from hsplus.exceptions import ToleranceNotMet
from hsplus.quadrature import integrate_1d


def test_smooth_integral():
    val, err = integrate_1d(math.exp, 0.0, 1.0)
    assert val == pytest.approx(math.e - 1, rel=1e-12)
    assert err < 1e-9


def test_breakpoints_outside_interval_are_ignored():
    val, _ = integrate_1d(lambda x: abs(x - 0.3), 0.0, 1.0, points=(-1.0, 0.3, 0.3, 5.0))
    assert val == pytest.approx(0.045 + 0.245, rel=1e-12)


def test_budget_exhaustion_raises():
    # oscillation far beyond what 5 panels can resolve
    with pytest.raises(ToleranceNotMet):
        integrate_1d(lambda x: math.sin(1e4 * x) ** 2, 0.0, 1.0, limit=5, epsabs=0.0, epsrel=1e-12)
