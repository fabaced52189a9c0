"""Shared domain types, validation, and deterministic randomness.

All types are immutable after construction (arrays are stored as read-only
float64 copies) and safe to share across threads.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 200_000

__all__ = [
    "DEFAULT_TOLERANCE",
    "DEFAULT_MAX_ITERATIONS",
    "DataValidationError",
    "RankDeficiencyError",
    "RngSeed",
    "Dataset",
    "AttackBudget",
    "SolverConfig",
    "FitResult",
    "validate_dataset",
]


class DataValidationError(ValueError):
    """Raised when raw inputs violate a dataset or shape invariant."""


class RankDeficiencyError(ValueError):
    """Raised when an operation requires full row rank and X does not have it."""


def _readonly_f64(a, name: str, ndim: int) -> np.ndarray:
    arr = np.array(a, dtype=np.float64, order="C", copy=True)
    if arr.ndim != ndim:
        raise DataValidationError(f"{name} must be {ndim}-dimensional, got ndim={arr.ndim}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class RngSeed:
    """A 64-bit seed; equal seeds give bit-identical streams on one platform."""

    seed: int = 0

    def __post_init__(self):
        if not (0 <= int(self.seed) < 2**64):
            raise ValueError("seed must fit in an unsigned 64-bit integer")

    def generator(self) -> np.random.Generator:
        return np.random.default_rng(self.seed)

    def children(self, count: int) -> list[int]:
        """Derived child seeds, deterministic in (seed, count)."""
        ss = np.random.SeedSequence(self.seed)
        return [int(s) for s in ss.generate_state(count, dtype=np.uint64)]


@dataclass(frozen=True)
class Dataset:
    """A design matrix X (n samples x m features) and response vector y (n)."""

    X: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        X = _readonly_f64(self.X, "X", 2)
        y = _readonly_f64(self.y, "y", 1)
        if X.shape[0] == 0 or X.shape[1] == 0:
            raise DataValidationError("X must have at least one row and one column")
        if y.shape[0] != X.shape[0]:
            raise DataValidationError(
                f"row count of X ({X.shape[0]}) must equal length of y ({y.shape[0]})"
            )
        if not np.all(np.isfinite(X)):
            raise DataValidationError("X contains non-finite entries")
        if not np.all(np.isfinite(y)):
            raise DataValidationError("y contains non-finite entries")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def m(self) -> int:
        return self.X.shape[1]


def validate_dataset(raw_X, raw_y) -> Dataset:
    """Build a Dataset from raw arrays, enforcing every invariant.

    Raises DataValidationError on dimension mismatch, non-finite entries,
    or empty data.
    """
    return Dataset(np.asarray(raw_X), np.asarray(raw_y))


@dataclass(frozen=True)
class AttackBudget:
    """Perturbation radius delta and norm order p, with conjugate order q.

    Only p in {2, inf} is constructible; q is derived from p so that
    1/p + 1/q = 1 holds exactly (p=2 -> q=2, p=inf -> q=1).
    """

    delta: float
    p: float

    def __post_init__(self):
        delta = float(self.delta)
        p = float(self.p)
        if not math.isfinite(delta) or delta < 0.0:
            raise ValueError("delta must be a finite nonnegative real")
        if p != 2.0 and not math.isinf(p):
            raise ValueError("p must be 2 or inf")
        object.__setattr__(self, "delta", delta)
        object.__setattr__(self, "p", p)

    @property
    def q(self) -> float:
        return 2.0 if self.p == 2.0 else 1.0

    def dual_norm(self, v: np.ndarray) -> float:
        """||v||_q, the norm conjugate to the attack norm."""
        if self.q == 2.0:
            return float(np.linalg.norm(v))
        return float(np.abs(v).sum())

    def attack_norm(self, v: np.ndarray) -> float:
        """||v||_p of a perturbation."""
        if self.p == 2.0:
            return float(np.linalg.norm(v))
        return float(np.abs(v).max()) if v.size else 0.0


@dataclass(frozen=True)
class SolverConfig:
    """Iteration budget, tolerances, and smoothing schedule for iterative fits.

    tolerance is relative to a per-problem gradient scale.  The smoothing
    schedule runs eps_initial -> eps_final, multiplying by eps_decay per
    stage.
    """

    max_iterations: int = DEFAULT_MAX_ITERATIONS
    tolerance: float = DEFAULT_TOLERANCE
    eps_initial: float = 1e-2
    eps_decay: float = 0.1
    eps_final: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be positive")
        if not (self.tolerance > 0.0):
            raise ValueError("tolerance must be positive")
        if not (self.eps_initial >= self.eps_final > 0.0):
            raise ValueError("need eps_initial >= eps_final > 0")
        if not (0.0 < self.eps_decay < 1.0):
            raise ValueError("eps_decay must lie in (0, 1)")

    def stages(self) -> list[float]:
        out = []
        eps = self.eps_initial
        while eps > self.eps_final * (1.0 + 1e-12):
            out.append(eps)
            eps *= self.eps_decay
        out.append(self.eps_final)
        return out


@dataclass(frozen=True)
class FitResult:
    """Fitted coefficients plus solver diagnostics.

    optimality_residual is the solver-specific stationarity measure
    (subgradient distance, KKT violation, linear-system residual, or duality
    gap); converged means it fell below the configured tolerance.
    """

    beta: np.ndarray
    objective: float
    iterations: int
    converged: bool
    optimality_residual: float
    method_tag: str
    diagnostics: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        beta = _readonly_f64(self.beta, "beta", 1)
        if not np.all(np.isfinite(beta)):
            raise ValueError("beta contains non-finite entries")
        if not math.isfinite(float(self.objective)):
            raise ValueError("objective must be finite")
        if self.iterations < 0:
            raise ValueError("iterations must be nonnegative")
        if self.optimality_residual < 0:
            raise ValueError("optimality_residual must be nonnegative")
        object.__setattr__(self, "beta", beta)
