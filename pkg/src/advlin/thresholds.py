"""Interpolation-threshold bounds and the orthonormal row basis behind them.

For a full-row-rank design X, adversarial training returns an interpolating
minimum-norm solution for every radius delta below a computable bound:
the smallest nonzero entry magnitude of X (sup-norm attacks) or of X Q^T
(Euclidean attacks), where Q has orthonormal rows spanning the rows of X.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .core import Dataset, RankDeficiencyError

ZERO_TOL = 1e-12

__all__ = ["ZERO_TOL", "ThresholdReport", "gamma_min", "row_space_basis", "interpolation_thresholds"]


@dataclass(frozen=True)
class ThresholdReport:
    """Both threshold bounds plus the orthonormal row basis Q (n x m)."""

    gamma_min_X: float
    gamma_min_XQt: float
    Q: np.ndarray


def gamma_min(M, zero_tol: float = ZERO_TOL) -> float:
    """Smallest magnitude among entries of M with |entry| > zero_tol.

    Raises ValueError when every entry is below the cutoff.
    """
    M = np.asarray(M, dtype=np.float64)
    mags = np.abs(M)
    nonzero = mags[mags > zero_tol]
    if nonzero.size == 0:
        raise ValueError("matrix has no entry above the zero tolerance")
    return float(nonzero.min())


def row_space_basis(X) -> np.ndarray:
    """Orthonormal rows spanning the rows of X, via reduced QR of X^T.

    Deterministic sign convention: the first nonzero entry of each basis
    vector is made positive.  Raises RankDeficiencyError when rank(X) < n.
    """
    X = np.asarray(X, dtype=np.float64)
    n, m = X.shape
    if n > m:
        raise RankDeficiencyError(f"X has {n} rows but rank at most {m}")
    Qt, R = scipy.linalg.qr(X.T, mode="economic")  # X^T = Qt R, Qt is m x n
    diag = np.abs(np.diag(R))
    rank_tol = max(n, m) * np.finfo(np.float64).eps * (diag.max() if diag.size else 0.0)
    if diag.size < n or np.any(diag <= rank_tol):
        raise RankDeficiencyError("X does not have full row rank")
    Q = Qt.T.copy()
    for i in range(n):
        row = Q[i]
        nz = np.nonzero(np.abs(row) > rank_tol)[0]
        anchor = nz[0] if nz.size else int(np.argmax(np.abs(row)))
        if row[anchor] < 0.0:
            Q[i] = -row
    return Q


def interpolation_thresholds(data: Dataset) -> ThresholdReport:
    """Threshold bounds gamma_min(X) and gamma_min(X Q^T) for a dataset.

    Requires rank(X) = n.  Neither bound dominates the other in general;
    both are conservative (the empirical interpolation threshold is often
    larger).
    """
    Q = row_space_basis(data.X)
    report = ThresholdReport(
        gamma_min_X=gamma_min(data.X),
        gamma_min_XQt=gamma_min(data.X @ Q.T),
        Q=Q,
    )
    return report
