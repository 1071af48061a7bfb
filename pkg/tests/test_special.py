import math

import mpmath
import pytest
from hypothesis import given, strategies as st

from spectral_anomaly import chi2_quantile, gumbel_quantile, inverse_normal_cdf
from spectral_anomaly.exceptions import ParameterError

mpmath.mp.dps = 40


def mp_inverse_normal(p):
    return float(-mpmath.sqrt(2) * mpmath.erfinv(1 - 2 * mpmath.mpf(p)))


@pytest.mark.parametrize("p, z", [(0.5, 0.0), (0.975, 1.959964), (0.98, 2.053749)])
def test_inverse_normal_table_values(p, z):
    assert inverse_normal_cdf(p) == pytest.approx(z, abs=1e-6)


@given(st.floats(min_value=1e-12, max_value=1 - 1e-12))
def test_inverse_normal_matches_high_precision(p):
    assert inverse_normal_cdf(p) == pytest.approx(mp_inverse_normal(p), abs=1e-8)


@given(st.floats(min_value=1e-9, max_value=0.5), st.floats(min_value=1e-9, max_value=0.5))
def test_inverse_normal_monotone_and_antisymmetric(p, q):
    if p < q:
        assert inverse_normal_cdf(p) < inverse_normal_cdf(q)
    assert inverse_normal_cdf(p) == pytest.approx(-inverse_normal_cdf(1 - p), abs=1e-8)


@pytest.mark.parametrize("bad", [0.0, 1.0, -0.1, 1.5, math.nan])
def test_inverse_normal_rejects_out_of_range(bad):
    with pytest.raises(ParameterError):
        inverse_normal_cdf(bad)


@pytest.mark.parametrize("p, q", [(0.95, 3.841459), (0.99, 6.634897), (0.5, 0.454936)])
def test_chi2_quantile(p, q):
    # oracle: squared normal quantile at (1 + p) / 2 in high precision
    assert chi2_quantile(p) == pytest.approx(q, abs=1e-6)
    assert chi2_quantile(p) == pytest.approx(mp_inverse_normal((1 + p) / 2) ** 2, abs=1e-9)


@given(st.floats(min_value=1e-6, max_value=1 - 1e-6))
def test_chi2_quantile_inverts_cdf(p):
    q = chi2_quantile(p)
    cdf = float(mpmath.erf(mpmath.sqrt(mpmath.mpf(q) / 2)))
    assert cdf == pytest.approx(p, abs=1e-9)


@pytest.mark.parametrize("alpha, k", [(0.05, 2.9702), (0.01, 4.6001)])
def test_gumbel_thresholds(alpha, k):
    assert gumbel_quantile(1 - alpha) == pytest.approx(k, abs=5e-5)


@given(st.floats(min_value=1e-9, max_value=1 - 1e-9))
def test_gumbel_quantile_inverts_cdf(p):
    assert math.exp(-math.exp(-gumbel_quantile(p))) == pytest.approx(p, rel=1e-9)
