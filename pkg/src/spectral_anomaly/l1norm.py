"""Eigenvector L1-norm detector.

A unit eigenvector spread over many nodes has a large L1 norm; one
concentrated on a small dense subgraph has a small norm. The statistic
``L = -min_k (|X_k|_1 - mu_k) / sigma_k`` therefore grows when some leading
residual eigenvector localizes. ``L`` is a minimum over ``m`` roughly normal
terms, so after the transform ``G = (L - a_m) / b_m`` it is compared with a
standard Gumbel quantile.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin

from ._special import gumbel_quantile, inverse_normal_cdf
from ._validation import check_int, check_probability
from .exceptions import DegenerateCalibrationError, ParameterError
from .results import L1Result
from .spectral import ResidualSpectrum, residual_spectrum

HISTORICAL = "historical_mom"
SELF_SOURCES = {"mean_sd": "self_mean_sd", "median_iqr": "self_median_iqr",
                "median_mad": "self_median_mad"}
IQR_CONSISTENCY = 1.3489
MAD_CONSISTENCY = 0.67449
EULER_GAMMA = 0.57722


@dataclass(frozen=True, eq=False)
class L1Calibration:
    """Per-eigenvector location ``mus`` and scale ``sigmas`` of the L1 norms."""

    mus: np.ndarray
    sigmas: np.ndarray
    source: str

    def __post_init__(self):
        mus = np.atleast_1d(np.asarray(self.mus, dtype=float))
        sig = np.atleast_1d(np.asarray(self.sigmas, dtype=float))
        if mus.shape != sig.shape or mus.ndim != 1:
            raise ParameterError("mus and sigmas must be 1-D and equally long")
        if not (sig > 0).all():
            raise DegenerateCalibrationError("calibration scale must be positive")
        object.__setattr__(self, "mus", mus)
        object.__setattr__(self, "sigmas", sig)

    @property
    def m(self):
        return self.mus.size


@dataclass(frozen=True)
class GumbelParams:
    """Location ``a_m`` and scale ``b_m`` mapping ``L`` to a standard Gumbel."""

    a_m: float
    b_m: float
    source: str

    def __post_init__(self):
        if not self.b_m > 0:
            raise DegenerateCalibrationError(f"Gumbel scale must be positive, got {self.b_m}")


def eigenvector_l1_norms(spectrum):
    """``sum_i |v_k[i]|`` for each eigenvector; accepts a spectrum or an (n, m) array."""
    V = spectrum.eigenvectors if isinstance(spectrum, ResidualSpectrum) else np.asarray(spectrum, float)
    if V.ndim == 1:
        V = V[:, None]
    return np.abs(V).sum(axis=0)


def calibrate_historical(historical_norms):
    """Column means and sample standard deviations of an (h, m) norm matrix."""
    H = np.asarray(historical_norms, dtype=float)
    if H.ndim != 2 or H.shape[0] < 2:
        raise ParameterError("historical norms must be an (h, m) matrix with h >= 2")
    sd = H.std(axis=0, ddof=1)
    if not (sd > 0).all():
        raise DegenerateCalibrationError("a historical L1 norm has zero variance")
    return L1Calibration(H.mean(axis=0), sd, HISTORICAL)


def calibrate_self(norms, method="median_iqr"):
    """One shared location/scale pair estimated from the observed norms.

    Parameters
    ----------
    norms : array-like of length m >= 4
    method : {"mean_sd", "median_iqr", "median_mad"}
        ``median_iqr`` uses ``IQR / 1.3489`` and ``median_mad`` uses the raw
        median absolute deviation divided by 0.67449, both consistent for the
        normal standard deviation. Quartiles use linear interpolation.
    """
    x = np.asarray(norms, dtype=float)
    if x.ndim != 1 or x.size < 4:
        raise ParameterError("self calibration needs at least 4 norms")
    if method not in SELF_SOURCES:
        raise ParameterError(f"method must be one of {tuple(SELF_SOURCES)}, got {method!r}")
    if method == "mean_sd":
        loc, scale = x.mean(), x.std(ddof=1)
    elif method == "median_iqr":
        q1, loc, q3 = np.quantile(x, [0.25, 0.5, 0.75])
        scale = (q3 - q1) / IQR_CONSISTENCY
    else:
        loc = np.median(x)
        scale = np.median(np.abs(x - loc)) / MAD_CONSISTENCY
    if not scale > 0:
        raise DegenerateCalibrationError(f"{method} scale is zero")
    return L1Calibration(np.full(x.size, loc), np.full(x.size, scale), SELF_SOURCES[method])


def l1_statistic(norms, cal):
    """Return ``(L, k_star)`` with ``L = -min_k z_k`` and ``k_star`` the 1-based argmin."""
    x = np.asarray(norms, dtype=float)
    if x.shape != cal.mus.shape:
        raise ParameterError(f"{x.size} norms but calibration covers {cal.m} eigenvectors")
    z = (x - cal.mus) / cal.sigmas
    k = int(np.argmin(z))
    return float(-z[k]), k + 1


def evt_params(m):
    """Normal-maxima norming constants ``a_m = Phi^-1(1 - 1/m)``, ``b_m = 1 / a_m``."""
    m = check_int(m, "m", 2)
    if m == 2:
        raise ParameterError("m=2 gives a_m = 0; extreme-value constants need m >= 3")
    a = inverse_normal_cdf(1.0 - 1.0 / m)
    return GumbelParams(a, 1.0 / a, "evt")


def mom_gumbel_params(historical_L):
    """Method-of-moments Gumbel fit: ``b = sqrt(6) S / pi``, ``a = mean - 0.57722 b``."""
    L = np.asarray(historical_L, dtype=float)
    if L.ndim != 1 or L.size < 2:
        raise ParameterError("need at least 2 historical statistics")
    s = L.std(ddof=1)
    if not s > 0:
        raise DegenerateCalibrationError("historical statistics have zero variance")
    b = math.sqrt(6.0) * s / math.pi
    return GumbelParams(float(L.mean() - b * EULER_GAMMA), b, "mom")


def gumbel_transform_and_decide(L, params, alpha=0.05, *, k_star=0, calibration=""):
    """Standardize ``L`` to ``G`` and compare with the standard Gumbel ``1 - alpha`` quantile."""
    alpha = check_probability(alpha, "alpha", open_interval=True)
    G = (float(L) - params.a_m) / params.b_m
    K = gumbel_quantile(1.0 - alpha)
    return L1Result(statistic=G, threshold=K, signal=bool(G > K), alpha=alpha, L=float(L),
                    k_star=int(k_star), a_m=params.a_m, b_m=params.b_m,
                    calibration=calibration, gumbel=params.source)


def default_m(n):
    """30 eigenvectors up to n = 256, 50 beyond (capped at n)."""
    return min(n, 30 if n <= 256 else 50)


def _as_network_list(X):
    if hasattr(X, "kind") or (isinstance(X, np.ndarray) and X.ndim == 2):
        return [X], True
    return X, False


class L1NormDetector(TransformerMixin, BaseEstimator):
    """Eigenvector L1-norm anomaly detector.

    Parameters
    ----------
    n_components : int, "auto" or "n", default="auto"
        Number of leading eigenvectors ``m``. ``"auto"`` uses 30 for
        ``n <= 256`` and 50 otherwise; ``"n"`` uses all of them.
    calibration : {"historical", "mean_sd", "median_iqr", "median_mad"} or None
        Source of ``mu_k`` and ``sigma_k``. ``None`` means ``"historical"``
        when :meth:`fit` receives anomaly-free networks and ``"median_iqr"``
        otherwise.
    gumbel : {"evt", "mom"}, default="evt"
        ``"evt"`` uses the normal-maxima constants for ``m``; ``"mom"`` fits
        the Gumbel to the statistics of the historical networks.
    alpha : float, default=0.05
    background : ModelSpec or {"er", "rank1"}, default="er"
    zero_diagonal : bool, default=False

    Attributes
    ----------
    m_ : int
    calibration_ : L1Calibration or None
        Fixed calibration from historical networks; ``None`` for self
        calibration, which is recomputed per network.
    gumbel_ : GumbelParams
    """

    def __init__(self, n_components="auto", calibration=None, gumbel="evt", alpha=0.05,
                 background="er", zero_diagonal=False):
        self.n_components = n_components
        self.calibration = calibration
        self.gumbel = gumbel
        self.alpha = alpha
        self.background = background
        self.zero_diagonal = zero_diagonal

    def _resolve_m(self, n):
        if self.n_components == "auto":
            return default_m(n)
        if self.n_components == "n":
            return n
        m = check_int(self.n_components, "n_components", 2)
        if m > n:
            raise ParameterError(f"n_components={m} exceeds n={n}")
        return m

    def _norms(self, A):
        n = np.shape(A)[0]
        if self.m_ is None:
            self.m_ = self._resolve_m(n)
        elif self.n_ != n:
            raise ParameterError(f"detector was fitted for n={self.n_}, got n={n}")
        spec = residual_spectrum(A, self.m_, self.background, zero_diagonal=self.zero_diagonal)
        return eigenvector_l1_norms(spec)

    def _calibration_for(self, norms):
        if self.calibration_ is not None:
            return self.calibration_
        return calibrate_self(norms, self.method_)

    def fit(self, X=None, y=None, n_nodes=None):
        """Calibrate on an iterable of anomaly-free networks, or nothing for self calibration.

        ``n_nodes`` fixes the network size up front when no networks are given,
        so later calls never need to finish the fit lazily.
        """
        check_probability(self.alpha, "alpha", open_interval=True)
        if self.gumbel not in ("evt", "mom"):
            raise ParameterError(f"gumbel must be 'evt' or 'mom', got {self.gumbel!r}")
        method = self.calibration
        if method is None:
            method = "historical" if X is not None else "median_iqr"
        if method != "historical" and method not in SELF_SOURCES:
            raise ParameterError(f"unknown calibration {method!r}")
        if X is None and (method == "historical" or self.gumbel == "mom"):
            raise ParameterError(f"calibration={method!r}, gumbel={self.gumbel!r} needs historical networks")
        self.method_ = method
        self.m_ = None
        self.n_ = None
        self.calibration_ = None
        history = None
        if X is not None:
            nets, _ = _as_network_list(X)
            rows = []
            for A in nets:
                if self.n_ is None:
                    self.n_ = np.shape(A)[0]
                rows.append(self._norms(A))
            if len(rows) < 2:
                raise ParameterError("need at least 2 historical networks")
            history = np.vstack(rows)
            if method == "historical":
                self.calibration_ = calibrate_historical(history)
        if self.m_ is None and n_nodes is not None:
            self.n_ = check_int(n_nodes, "n_nodes", 2)
            self.m_ = self._resolve_m(self.n_)
        if self.gumbel == "mom":
            L = [l1_statistic(row, self._calibration_for(row))[0] for row in history]
            self.gumbel_ = mom_gumbel_params(L)
        else:
            self.gumbel_ = None if self.m_ is None else evt_params(self.m_)
        return self

    def _ensure_fitted(self, A):
        if not hasattr(self, "method_"):
            self.fit()
        if self.m_ is None:
            self.n_ = np.shape(A)[0]
            self.m_ = self._resolve_m(self.n_)
        if self.gumbel_ is None:
            self.gumbel_ = evt_params(self.m_)

    def transform(self, X):
        """L1 norms of the leading ``m`` residual eigenvectors, one row per network."""
        nets, single = _as_network_list(X)
        rows = []
        for A in nets:
            self._ensure_fitted(A)
            rows.append(self._norms(A))
        out = np.vstack(rows) if rows else np.empty((0, 0))
        return out[0] if single else out

    def detect(self, A):
        """Full :class:`L1Result` for one network."""
        self._ensure_fitted(A)
        norms = self._norms(A)
        cal = self._calibration_for(norms)
        L, k_star = l1_statistic(norms, cal)
        return gumbel_transform_and_decide(L, self.gumbel_, self.alpha, k_star=k_star,
                                           calibration=cal.source)

    def decision_function(self, X):
        """Gumbel-scale statistic ``G`` per network."""
        nets, single = _as_network_list(X)
        out = np.array([self.detect(A).statistic for A in nets])
        return out[0] if single else out

    def predict(self, X):
        """1 for networks flagged as anomalous, 0 otherwise."""
        nets, single = _as_network_list(X)
        out = np.array([int(self.detect(A).signal) for A in nets])
        return out[0] if single else out
