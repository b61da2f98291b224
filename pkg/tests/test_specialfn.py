import math

import numpy as np
import pytest
from scipy import stats

from hsplus import specialfn as sf
from hsplus.exceptions import DomainError


def test_normal_cdf_quantile_roundtrip():
    p = np.array([1e-300, 1e-10, 0.025, 0.5, 0.975, 1 - 1e-12])
    np.testing.assert_allclose(sf.std_normal_cdf(sf.std_normal_quantile(p)), p, rtol=1e-10)


def test_normal_sf_upper_tail_is_accurate():
    # 1 - Phi(10) would round to 0 via the CDF
    assert sf.std_normal_sf(10.0) == pytest.approx(7.61985302416047e-24, rel=1e-12)


def test_scalar_returns_float():
    assert isinstance(sf.std_normal_pdf(0.0), float)
    assert sf.std_normal_pdf(0.0) == pytest.approx(1 / math.sqrt(2 * math.pi))


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, float("nan")])
def test_quantile_domain(bad):
    with pytest.raises(DomainError):
        sf.std_normal_quantile(bad)


def test_e1_matches_series_oracle():
    # E1(x) = -gamma - log x - sum_k (-x)^k / (k k!)
    x = 0.3
    series = -sf.EULER_GAMMA - math.log(x) - sum((-x) ** k / (k * math.factorial(k)) for k in range(1, 40))
    assert sf.exp_integral_e1(x) == pytest.approx(series, rel=1e-13)
    with pytest.raises(DomainError):
        sf.exp_integral_e1(0.0)


def test_student_t_cdf_against_scipy_distribution():
    t = np.linspace(-6, 6, 13)
    np.testing.assert_allclose(sf.student_t_cdf(t, 100), stats.t(100).cdf(t), rtol=1e-12)
    with pytest.raises(DomainError):
        sf.student_t_cdf(1.0, 0.5)


def test_erfc_rejects_nonfinite():
    assert sf.erfc(0.0) == 1.0
    with pytest.raises(DomainError):
        sf.erfc(float("inf"))
