"""Detection outcomes and their one-line CSV serialization."""

from __future__ import annotations

from dataclasses import dataclass


def fmt(value):
    """Format a number with 6 significant digits; booleans as true/false."""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return f"{value:.6g}"
    return str(value)


@dataclass(frozen=True)
class DetectionResult:
    """Common fields: the threshold-compared statistic and the decision."""

    statistic: float
    threshold: float
    signal: bool
    alpha: float

    CSV_FIELDS = ()

    @classmethod
    def csv_header(cls):
        return ",".join(cls.CSV_FIELDS)

    def csv_row(self):
        return ",".join(fmt(getattr(self, f)) for f in self.CSV_FIELDS)


@dataclass(frozen=True)
class ChiSquareResult(DetectionResult):
    theta_argmax: float = 0.0
    improved: bool = False
    k: float = 0.35

    CSV_FIELDS = ("statistic", "theta_argmax", "threshold", "signal", "improved", "k", "alpha")


@dataclass(frozen=True)
class L1Result(DetectionResult):
    """``statistic`` holds the Gumbel-transformed ``G``; ``L`` is the raw value."""

    L: float = 0.0
    k_star: int = 0
    a_m: float = 0.0
    b_m: float = 1.0
    calibration: str = ""
    gumbel: str = ""

    CSV_FIELDS = ("L", "G", "k_star", "a_m", "b_m", "calibration", "gumbel", "threshold",
                  "signal", "alpha")

    @property
    def G(self):
        return self.statistic
