"""Input validation and seeded random-stream helpers."""

import numbers

import numpy as np

from .exceptions import ContractViolation, ParameterError

SYMMETRY_TOL = 1e-10


def stream(base_seed, *key):
    """Independent PCG64 generator for the stream ``(base_seed, *key)``.

    Streams are derived with :class:`numpy.random.SeedSequence` spawn keys, so
    the generator for a given key never depends on which other streams were
    created or in what order.
    """
    seq = np.random.SeedSequence(int(base_seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.PCG64(seq))


def as_generator(seed):
    """Accept an int seed, a SeedSequence or a Generator."""
    if isinstance(seed, np.random.Generator):
        return seed
    if isinstance(seed, np.random.SeedSequence):
        return np.random.Generator(np.random.PCG64(seed))
    if isinstance(seed, numbers.Integral) and not isinstance(seed, bool):
        return np.random.Generator(np.random.PCG64(int(seed)))
    raise ParameterError(f"seed must be an int, SeedSequence or Generator, got {type(seed).__name__}")


def check_probability(value, name, *, open_interval=False):
    value = float(value)
    ok = 0.0 < value < 1.0 if open_interval else 0.0 <= value <= 1.0
    if not ok or np.isnan(value):
        bounds = "(0, 1)" if open_interval else "[0, 1]"
        raise ParameterError(f"{name} must lie in {bounds}, got {value!r}")
    return value


def check_nonnegative(value, name):
    value = float(value)
    if not value >= 0.0 or not np.isfinite(value):
        raise ParameterError(f"{name} must be a finite nonnegative number, got {value!r}")
    return value


def check_positive(value, name):
    value = float(value)
    if not value > 0.0 or not np.isfinite(value):
        raise ParameterError(f"{name} must be a finite positive number, got {value!r}")
    return value


def check_int(value, name, minimum):
    if isinstance(value, bool) or not isinstance(value, numbers.Integral):
        raise ParameterError(f"{name} must be an integer, got {value!r}")
    if value < minimum:
        raise ParameterError(f"{name} must be >= {minimum}, got {value}")
    return int(value)


def check_symmetric(B, name="matrix", tol=SYMMETRY_TOL):
    """Return ``B`` as a float array after checking it is square and symmetric."""
    B = np.asarray(B, dtype=float)
    if B.ndim != 2 or B.shape[0] != B.shape[1]:
        raise ParameterError(f"{name} must be a square 2-D array, got shape {B.shape}")
    if not np.all(np.isfinite(B)):
        raise ParameterError(f"{name} contains non-finite entries")
    if B.size and np.max(np.abs(B - B.T)) > tol:
        raise ContractViolation(f"{name} is not symmetric within {tol:g}")
    return B
