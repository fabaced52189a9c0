"""Adversarial and robust risk evaluation, worst-case attacks, subgradients.

The central identity: for attacks of norm p and radius delta, the empirical
adversarial risk of a linear model equals

    (1/n) * sum_i (|y_i - x_i' beta| + delta * ||beta||_q)^2

with q conjugate to p.  Everything in this module is a pure function of
immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import thresholds as _thresholds
from ._kernels import bounded_least_squares
from .core import AttackBudget, DataValidationError, Dataset

TOL_INTERP = 1e-6  # absolute tolerance defining "interpolates sample i"

__all__ = [
    "TOL_INTERP",
    "AttackVector",
    "CertificateReport",
    "adv_risk",
    "worst_case_attack",
    "robust_risk_samplewise",
    "robust_risk_featurewise",
    "adv_risk_subgradient",
    "adv_subgradient_distance",
    "sqrt_lasso_subgradient_distance",
    "check_interpolation_certificate",
]


@dataclass(frozen=True)
class AttackVector:
    """A worst-case input perturbation for one sample.

    attained_value is the attacked absolute residual |y - (x + dx)' beta|.
    """

    delta_x: np.ndarray
    attained_value: float


@dataclass(frozen=True)
class CertificateReport:
    """Outcome of the interpolation optimality check.

    holds is true when every sample interpolates within tolerance and the
    attack radius does not exceed delta_bound (the threshold bound for the
    requested attack norm).  detail carries the per-sample absolute
    residuals.
    """

    holds: bool
    per_sample_interpolation: np.ndarray
    delta_bound: float
    detail: np.ndarray


def _check_beta(beta, m: int) -> np.ndarray:
    beta = np.asarray(beta, dtype=np.float64)
    if beta.ndim != 1 or beta.shape[0] != m:
        raise DataValidationError(f"beta must be a vector of length {m}, got shape {beta.shape}")
    return beta


def adv_risk(beta, data: Dataset, budget: AttackBudget) -> float:
    """Empirical adversarial risk (1/n) sum (|y_i - x_i'beta| + delta ||beta||_q)^2."""
    beta = _check_beta(beta, data.m)
    r = data.y - data.X @ beta
    f = np.abs(r) + budget.delta * budget.dual_norm(beta)
    return float(f @ f) / data.n


def worst_case_attack(beta, x, y: float, budget: AttackBudget) -> AttackVector:
    """Perturbation of one sample attaining the adversarial risk's inner max.

    With residual r = y - x'beta and sign(0) taken as +1:
      p=inf: dx_j = -sign(r) * delta * sign(beta_j)   (0 where beta_j = 0)
      p=2:   dx   = -sign(r) * delta * beta / ||beta||_2
    For beta = 0 the attack cannot change the prediction and dx = 0.
    """
    x = np.asarray(x, dtype=np.float64)
    beta = _check_beta(beta, x.shape[0])
    r = float(y) - float(x @ beta)
    sign_r = 1.0 if r >= 0.0 else -1.0
    norm_b = budget.dual_norm(beta)
    if norm_b == 0.0:
        dx = np.zeros_like(beta)
    elif budget.p == 2.0:
        dx = (-sign_r * budget.delta / norm_b) * beta
    else:
        dx = -sign_r * budget.delta * np.sign(beta)
    attained = abs(float(y) - float((x + dx) @ beta))
    return AttackVector(delta_x=dx, attained_value=attained)


def robust_risk_samplewise(beta, data: Dataset, budget: AttackBudget) -> float:
    """Worst-case residual norm over row-wise disturbances ||dx_i||_p <= delta.

    Equals sqrt(n * adv_risk) exactly: the squared version is the
    adversarial risk.
    """
    beta = _check_beta(beta, data.m)
    r = data.y - data.X @ beta
    f = np.abs(r) + budget.delta * budget.dual_norm(beta)
    return float(np.linalg.norm(f))


def robust_risk_featurewise(beta, data: Dataset, delta: float) -> float:
    """Worst-case residual norm over column-wise disturbances ||zeta_j||_2 <= delta.

    Closed form ||y - X beta||_2 + delta ||beta||_1, i.e. the square-root
    lasso objective.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    beta = _check_beta(beta, data.m)
    r = data.y - data.X @ beta
    return float(np.linalg.norm(r)) + float(delta) * float(np.abs(beta).sum())


def adv_risk_subgradient(beta, data: Dataset, budget: AttackBudget) -> np.ndarray:
    """Canonical subgradient of the adversarial risk.

    Selection conventions: sign(0) = 0 in the residual term, and the norm
    subgradient g is beta/||beta||_2 (zero at the origin) for q=2 and the
    componentwise sign for q=1.  Any such selection is a valid element of
    the subdifferential.
    """
    beta = _check_beta(beta, data.m)
    n = data.n
    delta = budget.delta
    r = data.y - data.X @ beta
    norm_b = budget.dual_norm(beta)
    f = np.abs(r) + delta * norm_b
    if budget.q == 2.0:
        g = beta / norm_b if norm_b > 0.0 else np.zeros_like(beta)
    else:
        g = np.sign(beta)
    return (2.0 / n) * (-(data.X.T @ (f * np.sign(r))) + delta * np.sum(f) * g)


def _min_norm_distance(v0, box_cols, B, ball_radius, inner_tol, max_iter=20000):
    """Distance from 0 to {v0 + sum t_k a_k + B u : |t_k|<=1, ||u||<=radius}.

    Tries the unconstrained least-squares solution first (its minimum-norm
    multipliers are usually feasible at certified points); falls back to
    projected FISTA otherwise.  Early stopping only ever overestimates the
    distance.
    """
    m = v0.shape[0]
    A = box_cols if box_cols is not None else np.zeros((m, 0))
    B = B if B is not None else np.zeros((m, 0))
    k, kb = A.shape[1], B.shape[1]
    if k + kb == 0:
        return float(np.linalg.norm(v0))
    M = np.hstack([A, B])
    sol, *_ = np.linalg.lstsq(M, -v0, rcond=None)
    t, u = sol[:k], sol[k:]
    slack = 1.0 + 1e-12
    if np.all(np.abs(t) <= slack) and (kb == 0 or np.linalg.norm(u) <= ball_radius * slack + 1e-300):
        return float(np.linalg.norm(v0 + M @ sol))
    lo = -np.ones(k)
    hi = np.ones(k)
    return float(
        bounded_least_squares(
            np.ascontiguousarray(v0),
            np.ascontiguousarray(A),
            lo,
            hi,
            np.ascontiguousarray(B),
            float(ball_radius),
            max_iter,
            inner_tol,
        )
    )


def adv_subgradient_distance(
    beta,
    data: Dataset,
    budget: AttackBudget,
    residual_zero_tol: float = 1e-9,
    coef_zero_tol: float = 1e-11,
) -> float:
    """Distance from the origin to the adversarial risk subdifferential at beta.

    Samples with |residual| below residual_zero_tol (relative to the response
    scale) and coefficients below coef_zero_tol contribute free directions;
    everything else is pinned to its unique selection.  A value of zero
    certifies global optimality of the convex risk; small values certify
    near-stationarity.
    """
    beta = _check_beta(beta, data.m)
    X, y = data.X, data.y
    n, m = data.n, data.m
    delta = budget.delta
    r = y - X @ beta
    norm_b = budget.dual_norm(beta)
    f = np.abs(r) + delta * norm_b
    w = (2.0 / n) * f
    y_scale = max(1.0, float(np.abs(y).max()))
    zero_r = np.abs(r) <= residual_zero_tol * y_scale
    W = float(w.sum())

    v0 = -(X.T @ (w * np.where(zero_r, 0.0, np.sign(r))))
    cols = []
    B = None
    ball_radius = 0.0
    b_scale = max(1.0, float(np.abs(beta).max()))
    if budget.q == 2.0:
        if norm_b > coef_zero_tol * b_scale:
            v0 = v0 + (delta * W / norm_b) * beta
        else:
            B = np.eye(m)
            ball_radius = delta * W
    else:
        live = np.abs(beta) > coef_zero_tol * b_scale
        v0 = v0 + delta * W * np.where(live, np.sign(beta), 0.0)
        free = np.nonzero(~live)[0]
        if free.size and delta * W > 0.0:
            E = np.zeros((m, free.size))
            E[free, np.arange(free.size)] = delta * W
            cols.append(E)
    idx = np.nonzero(zero_r)[0]
    if idx.size:
        cols.append(-(X[idx, :].T * w[idx]))
    A = np.hstack(cols) if cols else None
    inner_tol = 1e-15 * max(1.0, float(np.linalg.norm(v0)))
    return _min_norm_distance(v0, A, B, ball_radius, inner_tol)


def sqrt_lasso_subgradient_distance(
    beta,
    data: Dataset,
    delta: float,
    residual_zero_tol: float = 1e-9,
    coef_zero_tol: float = 1e-11,
) -> float:
    """Distance from the origin to the subdifferential of ||y-Xb||_2 + delta ||b||_1."""
    beta = _check_beta(beta, data.m)
    X, y = data.X, data.y
    m = data.m
    r = y - X @ beta
    rn = float(np.linalg.norm(r))
    y_scale = max(1.0, float(np.linalg.norm(y)))
    b_scale = max(1.0, float(np.abs(beta).max()))
    cols = []
    B = None
    ball_radius = 0.0
    if rn > residual_zero_tol * y_scale:
        v0 = -(X.T @ r) / rn
    else:
        v0 = np.zeros(m)
        B = -X.T.copy()
        ball_radius = 1.0
    live = np.abs(beta) > coef_zero_tol * b_scale
    v0 = v0 + delta * np.where(live, np.sign(beta), 0.0)
    free = np.nonzero(~live)[0]
    if free.size and delta > 0.0:
        E = np.zeros((m, free.size))
        E[free, np.arange(free.size)] = delta
        cols.append(E)
    A = np.hstack(cols) if cols else None
    inner_tol = 1e-15 * max(1.0, float(np.linalg.norm(v0)))
    return _min_norm_distance(v0, A, B, ball_radius, inner_tol)


def check_interpolation_certificate(
    beta,
    data: Dataset,
    budget: AttackBudget,
    tol_interp: float = TOL_INTERP,
) -> CertificateReport:
    """Sufficient-condition check that beta minimizes the adversarial risk.

    Passes when (a) every sample interpolates, |y_i - x_i'beta| <= tol_interp,
    and (b) the attack radius stays within the threshold bound for the attack
    norm: gamma_min(X) for sup-norm attacks, gamma_min(X Q^T) for Euclidean
    attacks.  Requires full row rank.  The bounds are conservative, and the
    check presumes beta is a minimum-norm interpolant (which is how certified
    solutions are produced); it does not verify norm minimality itself.
    """
    beta = _check_beta(beta, data.m)
    report = _thresholds.interpolation_thresholds(data)
    residuals = np.abs(data.y - data.X @ beta)
    per_sample = residuals <= tol_interp
    bound = report.gamma_min_XQt if budget.p == 2.0 else report.gamma_min_X
    holds = bool(per_sample.all()) and budget.delta <= bound
    return CertificateReport(
        holds=holds,
        per_sample_interpolation=per_sample,
        delta_bound=float(bound),
        detail=residuals,
    )
