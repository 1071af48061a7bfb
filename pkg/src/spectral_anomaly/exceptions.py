"""Exception hierarchy shared by generators, detectors and the study harness."""


class ParameterError(ValueError):
    """An argument violates a documented precondition."""


class ModeError(ParameterError):
    """An anomaly or model mode is incompatible with the network kind."""


class ContractViolation(ValueError):
    """An input breaks a structural contract (e.g. a non-symmetric matrix)."""


class DegenerateError(ArithmeticError):
    """A computation has no meaningful value for this input.

    Raised for empty graphs, zero-marginal contingency tables and zero-scale
    calibrations. The study harness counts these separately instead of
    dropping them.
    """


class DegenerateGraphError(DegenerateError):
    pass


class DegenerateTableError(DegenerateError):
    pass


class DegenerateCalibrationError(DegenerateError):
    pass


class FormatError(ParameterError):
    """A network or configuration file could not be parsed."""
