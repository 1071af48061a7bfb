"""Residual matrices ``B = A - E[A]`` and their leading eigenpairs."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ._validation import check_int, check_symmetric
from .exceptions import DegenerateGraphError, ParameterError
from .netgen import (BINARY, COUNT, AdjacencyMatrix, ChungLuBinary, ChungLuCount, ErBinary,
                     ErCount, Rmat)

ER_BINARY = "er_binary"
ER_COUNT = "er_count"
RANK1_DEGREE = "rank1_degree"


@dataclass(frozen=True, eq=False)
class ExpectedMatrix:
    """Expected adjacency ``E[A]`` together with how it was obtained."""

    matrix: np.ndarray
    provenance: str


@dataclass(frozen=True, eq=False)
class ResidualSpectrum:
    """Leading ``m`` eigenpairs of a residual matrix, eigenvalues descending.

    ``eigenvectors[:, k]`` is the unit eigenvector for ``eigenvalues[k]``.
    """

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray

    @property
    def n(self) -> int:
        return self.eigenvectors.shape[0]

    @property
    def m(self) -> int:
        return self.eigenvectors.shape[1]


def _as_adjacency(A):
    if isinstance(A, AdjacencyMatrix):
        return A
    arr = np.asarray(A)
    kind = BINARY if np.isin(arr, (0, 1)).all() else COUNT
    return AdjacencyMatrix(arr, kind)


def _rank1(A):
    k = A.degrees
    total = k.sum()
    if total <= 0:
        raise DegenerateGraphError("rank-1 expectation undefined for a graph with no edges")
    return np.outer(k, k) / total


def expected_matrix(A, model="er", *, zero_diagonal=False):
    """Expected adjacency matrix under a background model.

    Parameters
    ----------
    A : AdjacencyMatrix or array-like
        Observed network. Plain arrays are treated as binary when every entry
        is 0 or 1.
    model : ModelSpec or {"er", "rank1"}, default="er"
        ``ErBinary``/``ErCount`` instances use their known parameter. The
        string ``"er"`` estimates it from ``A`` (edge density in binary mode,
        mean off-diagonal entry in count mode). R-MAT, Chung-Lu and ``"rank1"``
        use ``k k^T / sum(k)`` with ``k`` the observed degrees of ``A``.
    zero_diagonal : bool, default=False
        Set the diagonal of ``E[A]`` to zero instead of applying the formula
        to ``i == j``.

    Returns
    -------
    ExpectedMatrix
    """
    A = _as_adjacency(A)
    n = A.n
    if isinstance(model, ErBinary):
        E, tag = np.full((n, n), model.p0), ER_BINARY
    elif isinstance(model, ErCount):
        E, tag = np.full((n, n), model.lambda0), ER_COUNT
    elif isinstance(model, (Rmat, ChungLuBinary, ChungLuCount)) or model == "rank1":
        E, tag = _rank1(A), RANK1_DEGREE
    elif model == "er":
        if n < 2:
            raise ParameterError("parameter estimation needs n >= 2")
        off = np.triu(A.entries, k=1)
        pairs = n * (n - 1) / 2
        if A.kind == BINARY:
            E, tag = np.full((n, n), np.count_nonzero(off) / pairs), ER_BINARY
        else:
            E, tag = np.full((n, n), off.sum() / pairs), ER_COUNT
    else:
        raise ParameterError(f"unknown background model {model!r}")
    if zero_diagonal:
        np.fill_diagonal(E, 0.0)
    return ExpectedMatrix(E, tag)


def residual_matrix(A, EA):
    """Elementwise ``A - E[A]``."""
    A = np.asarray(A, dtype=float)
    E = EA.matrix if isinstance(EA, ExpectedMatrix) else np.asarray(EA, dtype=float)
    if A.shape != E.shape:
        raise ParameterError(f"shape mismatch: A {A.shape} vs E[A] {E.shape}")
    return A - E


def normalize_signs(V):
    """Flip columns so each one's largest-magnitude entry is positive.

    Ties in magnitude go to the lowest row index. Idempotent.
    """
    V = np.array(V, dtype=float)
    if V.size == 0:
        return V
    idx = np.argmax(np.abs(V), axis=0)
    signs = np.sign(V[idx, np.arange(V.shape[1])])
    signs[signs == 0] = 1.0
    return V * signs


def top_eigenpairs(B, m):
    """The ``m`` algebraically largest eigenpairs of a symmetric matrix.

    Parameters
    ----------
    B : array-like of shape (n, n)
        Symmetric within 1e-10.
    m : int
        Number of eigenpairs, ``1 <= m <= n``.

    Returns
    -------
    ResidualSpectrum
        Eigenvalues in non-increasing order, sign-normalized eigenvectors.
    """
    B = check_symmetric(B, "B")
    n = B.shape[0]
    m = check_int(m, "m", 1)
    if m > n:
        raise ParameterError(f"m must be <= n={n}, got {m}")
    # Symmetrize exactly so LAPACK sees the same matrix regardless of triangle.
    B = 0.5 * (B + B.T)
    subset = None if m == n else [n - m, n - 1]
    w, V = scipy.linalg.eigh(B, subset_by_index=subset, driver="evr")
    w = w[::-1].copy()
    V = normalize_signs(V[:, ::-1])
    return ResidualSpectrum(w, V)


def residual_spectrum(A, m, model="er", *, zero_diagonal=False):
    """Convenience pipeline: expected matrix, residual and top ``m`` eigenpairs."""
    EA = expected_matrix(A, model, zero_diagonal=zero_diagonal)
    return top_eigenpairs(residual_matrix(np.asarray(A, dtype=float), EA), m)
