"""Spectral anomaly detection for static binary and count networks.

Two detectors work on the residual matrix ``B = A - E[A]``:
:class:`ChiSquareDetector` (quadrant chi-square on the first two
eigenvectors) and :class:`L1NormDetector` (standardized minimum eigenvector
L1 norm with Gumbel calibration).
"""

from ._special import chi2_quantile, gumbel_quantile, inverse_normal_cdf
from .chisq import ChiSqConfig, ChiSquareDetector, chi_square_max, quadrant_counts
from .exceptions import (ContractViolation, DegenerateCalibrationError, DegenerateError,
                         DegenerateGraphError, DegenerateTableError, FormatError, ModeError,
                         ParameterError)
from .l1norm import L1NormDetector
from .netgen import AdjacencyMatrix, AnomalySpec
from .spectral import residual_spectrum, top_eigenpairs

__version__ = "0.1.0"

__all__ = [
    "AdjacencyMatrix", "AnomalySpec", "ChiSqConfig", "ChiSquareDetector", "ContractViolation",
    "DegenerateCalibrationError", "DegenerateError", "DegenerateGraphError",
    "DegenerateTableError", "FormatError", "L1NormDetector", "ModeError", "ParameterError",
    "chi2_quantile", "chi_square_max", "gumbel_quantile", "inverse_normal_cdf",
    "quadrant_counts", "residual_spectrum", "top_eigenpairs",
]
