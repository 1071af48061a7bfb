"""Normal and extreme-value quantile functions used for thresholds."""

import math

from scipy.special import ndtri

from .exceptions import ParameterError


def _check_open_unit(p, name="p"):
    p = float(p)
    if not 0.0 < p < 1.0:
        raise ParameterError(f"{name} must lie strictly between 0 and 1, got {p!r}")
    return p


def inverse_normal_cdf(p):
    """Standard normal quantile ``z`` with ``Phi(z) = p``.

    Raises
    ------
    ParameterError
        If ``p`` is not strictly inside (0, 1).
    """
    return float(ndtri(_check_open_unit(p)))


def chi2_quantile(p):
    """Quantile of the chi-square distribution with one degree of freedom.

    Uses ``chi2_1 = Z**2`` so the ``p`` quantile is ``Phi^-1((1 + p) / 2) ** 2``.
    """
    p = _check_open_unit(p)
    return inverse_normal_cdf(0.5 + 0.5 * p) ** 2


def gumbel_quantile(p):
    """Quantile of the standard Gumbel (maximum) distribution."""
    p = _check_open_unit(p)
    return -math.log(-math.log(p))
