"""Random network generators and anomaly embedding.

Three background families are supported: Erdos-Renyi, R-MAT and Chung-Lu,
each in a binary (0/1) variant and, except R-MAT, a Poisson count variant.
All samplers are pure functions of their parameters and seed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Union

import numpy as np

from ._validation import (as_generator, check_int, check_nonnegative, check_positive,
                          check_probability)
from .exceptions import ContractViolation, FormatError, ModeError, ParameterError

BINARY = "binary"
COUNT = "count"
_KINDS = (BINARY, COUNT)


@dataclass(frozen=True, eq=False)
class AdjacencyMatrix:
    """Symmetric matrix of nonnegative integer edge counts.

    Parameters
    ----------
    entries : array-like of shape (n, n)
        Edge counts; must be symmetric. In binary mode every entry is 0 or 1.
    kind : {"binary", "count"}
    """

    entries: np.ndarray
    kind: str = BINARY

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ParameterError(f"kind must be one of {_KINDS}, got {self.kind!r}")
        raw = np.asarray(self.entries)
        if raw.ndim != 2 or raw.shape[0] != raw.shape[1]:
            raise ParameterError(f"adjacency must be square, got shape {raw.shape}")
        ent = raw.astype(np.int64)
        if not np.array_equal(ent, raw):
            raise ParameterError("adjacency entries must be integers")
        if (ent < 0).any():
            raise ParameterError("adjacency entries must be nonnegative")
        if not np.array_equal(ent, ent.T):
            raise ContractViolation("adjacency matrix is not symmetric")
        if self.kind == BINARY and (ent > 1).any():
            raise ParameterError("binary adjacency entries must be 0 or 1")
        ent.setflags(write=False)
        object.__setattr__(self, "entries", ent)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    @property
    def degrees(self) -> np.ndarray:
        """Row sums (degree in binary mode, strength in count mode)."""
        return self.entries.sum(axis=1).astype(float)

    @property
    def edge_count(self) -> int:
        """Number of distinct undirected edges, self-loops included."""
        return int(np.count_nonzero(np.triu(self.entries)))

    def __array__(self, dtype=None, copy=None):
        return np.asarray(self.entries, dtype=dtype)

    def __eq__(self, other):
        if not isinstance(other, AdjacencyMatrix):
            return NotImplemented
        return self.kind == other.kind and np.array_equal(self.entries, other.entries)

    __hash__ = None


def _pairs(n):
    return np.triu_indices(n, k=1)


def _from_upper(n, values, kind):
    A = np.zeros((n, n), dtype=np.int64)
    iu = _pairs(n)
    A[iu] = values
    A.T[iu] = values
    return AdjacencyMatrix(A, kind)


# ---------------------------------------------------------------------------
# Background models


@dataclass(frozen=True)
class ErBinary:
    """Erdos-Renyi graph with edge probability ``p0``."""

    p0: float
    kind = BINARY

    def __post_init__(self):
        object.__setattr__(self, "p0", check_probability(self.p0, "p0"))

    def sample(self, n, seed):
        return sample_er_binary(n, self.p0, seed)


@dataclass(frozen=True)
class ErCount:
    """Poisson Erdos-Renyi multigraph with constant rate ``lambda0``."""

    lambda0: float
    kind = COUNT

    def __post_init__(self):
        object.__setattr__(self, "lambda0", check_nonnegative(self.lambda0, "lambda0"))

    def sample(self, n, seed):
        return sample_er_count(n, self.lambda0, seed)

    def rates(self, i, j):
        return np.full(np.shape(i), self.lambda0, dtype=float)


@dataclass(frozen=True)
class Rmat:
    """Recursive-matrix model with ``M`` edge slots and partition probabilities.

    ``a, b, c, d`` are the probabilities of descending into the top-left,
    top-right, bottom-left and bottom-right quadrant at each level.
    """

    M: int
    a: float = 0.5
    b: float = 0.125
    c: float = 0.125
    d: float = 0.25
    kind = BINARY

    def __post_init__(self):
        check_rmat_params(self.M, self.a, self.b, self.c, self.d)

    @classmethod
    def from_density(cls, n, p0, **probs):
        """Edge budget ``M = n (n - 1) p0`` rounded to the nearest even integer."""
        p0 = check_probability(p0, "p0")
        M = 2 * int(round(n * (n - 1) * p0 / 2.0))
        return cls(M=max(M, 2), **probs)

    def sample(self, n, seed):
        return sample_rmat_binary(n, self.M, self.a, self.b, self.c, self.d, seed)


@dataclass(frozen=True, eq=False)
class ChungLuBinary:
    """Expected-degree graph with ``p_ij = min(1, k_i k_j / sum(k))``."""

    degrees: np.ndarray
    kind = BINARY

    def __post_init__(self):
        object.__setattr__(self, "degrees", _check_degrees(self.degrees, strict=False))

    def sample(self, n, seed):
        if n != len(self.degrees):
            raise ParameterError(f"model has {len(self.degrees)} degrees but n={n}")
        return sample_chunglu_binary(self.degrees, seed)


@dataclass(frozen=True, eq=False)
class ChungLuCount:
    """Poisson expected-degree multigraph with ``lambda_ij = c k_i k_j``.

    ``c`` defaults to ``1 / sum(k)`` so expected strengths equal ``k``.
    """

    degrees: np.ndarray
    c: float | None = None
    kind = COUNT

    def __post_init__(self):
        k = _check_degrees(self.degrees, strict=True)
        object.__setattr__(self, "degrees", k)
        c = 1.0 / k.sum() if self.c is None else check_positive(self.c, "c")
        object.__setattr__(self, "c", c)

    def sample(self, n, seed):
        if n != len(self.degrees):
            raise ParameterError(f"model has {len(self.degrees)} degrees but n={n}")
        return sample_chunglu_count(self.degrees, self.c, seed)

    def rates(self, i, j):
        return self.c * self.degrees[i] * self.degrees[j]


ModelSpec = Union[ErBinary, ErCount, Rmat, ChungLuBinary, ChungLuCount]


# ---------------------------------------------------------------------------
# Anomalies


@dataclass(frozen=True)
class CliqueBinary:
    """Redraw within-set pairs as Bernoulli(``p1``); ``p1 = 1`` gives a clique."""

    p1: float = 1.0
    kind = BINARY

    def __post_init__(self):
        object.__setattr__(self, "p1", check_probability(self.p1, "p1"))


@dataclass(frozen=True)
class CountShift:
    """Redraw within-set pairs as Poisson(base rate + ``delta``)."""

    delta: float
    kind = COUNT

    def __post_init__(self):
        object.__setattr__(self, "delta", check_nonnegative(self.delta, "delta"))


AnomalyMode = Union[CliqueBinary, CountShift]


@dataclass(frozen=True, eq=False)
class AnomalySpec:
    """Set of anomalous nodes and the rule used to redraw their mutual edges."""

    nodes: np.ndarray
    mode: AnomalyMode = field(default_factory=CliqueBinary)

    def __post_init__(self):
        nodes = np.unique(np.asarray(list(self.nodes), dtype=np.int64))
        if nodes.size < 2:
            raise ParameterError("an anomaly needs at least 2 distinct nodes")
        if nodes[0] < 0:
            raise ParameterError("anomaly node indices must be nonnegative")
        if not isinstance(self.mode, (CliqueBinary, CountShift)):
            raise ModeError(f"unknown anomaly mode {self.mode!r}")
        object.__setattr__(self, "nodes", nodes)


# ---------------------------------------------------------------------------
# Samplers


def _check_n(n, minimum=2):
    return check_int(n, "n", minimum)


def _check_degrees(degrees, *, strict):
    k = np.asarray(degrees, dtype=float)
    if k.ndim != 1 or k.size < 2:
        raise ParameterError("degrees must be a 1-D sequence of length >= 2")
    if not np.all(np.isfinite(k)):
        raise ParameterError("degrees must be finite")
    if strict and (k <= 0).any():
        raise ParameterError("degrees must all be positive")
    if (k < 0).any():
        raise ParameterError("degrees must be nonnegative")
    if k.sum() <= 0:
        raise ParameterError("degree sequence sums to zero")
    k = k.copy()
    k.setflags(write=False)
    return k


def check_rmat_params(M, a, b, c, d):
    check_int(M, "M", 2)
    if M % 2:
        raise ParameterError(f"M must be even, got {M}")
    probs = np.array([a, b, c, d], dtype=float)
    if (probs < 0).any() or not np.all(np.isfinite(probs)):
        raise ParameterError("R-MAT probabilities must be nonnegative")
    if abs(probs.sum() - 1.0) > 1e-12:
        raise ParameterError(f"R-MAT probabilities must sum to 1, got {float(probs.sum())!r}")
    if abs(b - c) > 1e-12:
        raise ParameterError("R-MAT requires b == c for an undirected graph")
    if not a >= d >= c:
        raise ParameterError("R-MAT requires a >= d >= b = c")


def sample_er_binary(n, p0, seed):
    """Binary Erdos-Renyi graph: every pair ``i < j`` is an edge with probability ``p0``."""
    n = _check_n(n)
    p0 = check_probability(p0, "p0")
    rng = as_generator(seed)
    u = rng.random(n * (n - 1) // 2)
    return _from_upper(n, (u < p0).astype(np.int64), BINARY)


def sample_er_count(n, lambda0, seed):
    """Poisson Erdos-Renyi multigraph with zero diagonal."""
    n = _check_n(n)
    lambda0 = check_nonnegative(lambda0, "lambda0")
    rng = as_generator(seed)
    return _from_upper(n, rng.poisson(lambda0, n * (n - 1) // 2), COUNT)


def sample_rmat_binary(n, M, a, b, c, d, seed):
    """Binary R-MAT graph from ``M / 2`` recursive edge placements.

    Each placement descends ``log2(n)`` levels, choosing a quadrant with
    probabilities ``(a, b, c, d)``. Repeated placements collapse to one edge
    and a placement on the diagonal creates a self-loop.
    """
    n = _check_n(n)
    if n & (n - 1):
        raise ParameterError(f"R-MAT needs n to be a power of two, got {n}")
    check_rmat_params(M, a, b, c, d)
    rng = as_generator(seed)
    levels = n.bit_length() - 1
    q = rng.choice(4, size=(M // 2, levels), p=[a, b, c, d])
    weights = 1 << np.arange(levels - 1, -1, -1)
    i = ((q >> 1) * weights).sum(axis=1)
    j = ((q & 1) * weights).sum(axis=1)
    A = np.zeros((n, n), dtype=np.int64)
    A[i, j] = 1
    A[j, i] = 1
    return AdjacencyMatrix(A, BINARY)


def chunglu_probabilities(degrees):
    """Matrix of ``min(1, k_i k_j / sum(k))`` edge probabilities."""
    k = _check_degrees(degrees, strict=False)
    return np.minimum(1.0, np.outer(k, k) / k.sum())


def sample_chunglu_binary(degrees, seed):
    """Binary Chung-Lu graph with zero diagonal."""
    P = chunglu_probabilities(degrees)
    n = P.shape[0]
    rng = as_generator(seed)
    u = rng.random(n * (n - 1) // 2)
    return _from_upper(n, (u < P[_pairs(n)]).astype(np.int64), BINARY)


def sample_pareto_degrees(n, eta, theta, seed):
    """Continuous Pareto(``eta``, ``theta``) draws via ``eta * U ** (-1 / theta)``."""
    n = check_int(n, "n", 1)
    eta = check_positive(eta, "eta")
    theta = check_positive(theta, "theta")
    rng = as_generator(seed)
    u = 1.0 - rng.random(n)  # (0, 1]
    return eta * u ** (-1.0 / theta)


def sample_chunglu_count(degrees, c, seed):
    """Poisson Chung-Lu multigraph with rates ``c k_i k_j`` and zero diagonal."""
    k = _check_degrees(degrees, strict=True)
    c = check_positive(c, "c")
    n = k.size
    iu = _pairs(n)
    rng = as_generator(seed)
    return _from_upper(n, rng.poisson(c * k[iu[0]] * k[iu[1]]), COUNT)


def embed_anomaly(A, spec, base=None, seed=0):
    """Redraw every pair inside ``spec.nodes``; all other entries are kept.

    Parameters
    ----------
    A : AdjacencyMatrix
    spec : AnomalySpec
    base : ModelSpec, optional
        Background model; required for :class:`CountShift`, whose rates are
        ``base.rates(i, j) + delta``.
    seed : int or numpy.random.Generator
    """
    if not isinstance(A, AdjacencyMatrix):
        raise ParameterError("embed_anomaly expects an AdjacencyMatrix")
    mode = spec.mode
    if mode.kind != A.kind:
        raise ModeError(f"{type(mode).__name__} anomaly needs a {mode.kind} network, got {A.kind}")
    nodes = spec.nodes
    if nodes[-1] >= A.n:
        raise ParameterError(f"anomaly node {nodes[-1]} out of range for n={A.n}")
    rng = as_generator(seed)
    s, t = np.triu_indices(nodes.size, k=1)
    i, j = nodes[s], nodes[t]
    if isinstance(mode, CliqueBinary):
        values = (rng.random(i.size) < mode.p1).astype(np.int64)
    else:
        if not hasattr(base, "rates"):
            raise ModeError("CountShift needs a count background model (ErCount or ChungLuCount)")
        if isinstance(base, ChungLuCount) and len(base.degrees) != A.n:
            raise ParameterError("background degree sequence does not match the network size")
        values = rng.poisson(base.rates(i, j) + mode.delta)
    E = np.array(A.entries)
    E[i, j] = values
    E[j, i] = values
    return AdjacencyMatrix(E, A.kind)


# ---------------------------------------------------------------------------
# Edge-list serialization


def write_edge_list(A, path):
    """Write ``A`` as a header line plus ``i<TAB>j[<TAB>weight]`` rows with ``i <= j``."""
    i, j = np.nonzero(np.triu(A.entries))
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(f"n={A.n} kind={A.kind}\n")
        if A.kind == BINARY:
            fh.writelines(f"{a}\t{b}\n" for a, b in zip(i, j))
        else:
            w = A.entries[i, j]
            fh.writelines(f"{a}\t{b}\t{c}\n" for a, b, c in zip(i, j, w))


def read_edge_list(path):
    """Parse a file written by :func:`write_edge_list`.

    Raises
    ------
    FormatError
        On a malformed header or row, an out-of-range index, a duplicate pair
        or a weight other than 1 in binary mode.
    """
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise FormatError(f"{path}: empty file")
    header = dict(tok.split("=", 1) for tok in lines[0].split() if "=" in tok)
    try:
        n = int(header["n"])
        kind = header["kind"]
    except (KeyError, ValueError):
        raise FormatError(f"{path}: header must read 'n=<n> kind=<binary|count>'") from None
    if n < 1 or kind not in _KINDS:
        raise FormatError(f"{path}: bad header {lines[0]!r}")
    E = np.zeros((n, n), dtype=np.int64)
    width = 2 if kind == BINARY else 3
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split("\t")
        if len(parts) != width:
            raise FormatError(f"{path}:{lineno}: expected {width} tab-separated fields")
        try:
            vals = [int(p) for p in parts]
        except ValueError:
            raise FormatError(f"{path}:{lineno}: non-integer field") from None
        i, j = vals[0], vals[1]
        w = vals[2] if kind == COUNT else 1
        if not 0 <= i <= j < n:
            raise FormatError(f"{path}:{lineno}: need 0 <= i <= j < n, got {i}, {j}")
        if w < 1:
            raise FormatError(f"{path}:{lineno}: weights must be positive")
        if E[i, j]:
            raise FormatError(f"{path}:{lineno}: duplicate pair ({i}, {j})")
        E[i, j] = E[j, i] = w
    return AdjacencyMatrix(E, kind)


def density(A):
    """Fraction of the ``n (n - 1) / 2`` off-diagonal pairs that carry an edge."""
    n = A.n
    off = np.count_nonzero(np.triu(A.entries, k=1))
    return off / (n * (n - 1) / 2) if n > 1 else math.nan
