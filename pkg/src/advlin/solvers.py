"""Estimator fits with verifiable optimality.

Adversarial training and square-root lasso share a two-tier strategy: a
smoothing-continuation ladder (L-BFGS on progressively less-smoothed
objectives) locates the active structure, then an exact structure-aware
polish solves the reduced problem to machine precision.  Candidate
solutions (zero, minimum-norm interpolators, polished points) are compared
on the exact objective and the winner is certified by the distance from
the origin to the subdifferential.

Lasso uses cyclic coordinate descent, ridge a direct linear solve, and the
minimum-l1 interpolator ADMM with a duality-gap certificate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import objective as _obj
from ._kernels import OBJ_ADV_Q1, OBJ_ADV_Q2, OBJ_SQRT_LASSO, lasso_cd, lbfgs_smoothed
from .core import (
    AttackBudget,
    DataValidationError,
    Dataset,
    FitResult,
    RankDeficiencyError,
    SolverConfig,
)

__all__ = [
    "EstimatorSpec",
    "fit",
    "fit_adversarial",
    "fit_lasso",
    "fit_ridge",
    "fit_sqrt_lasso",
    "fit_ols",
    "min_l1_interpolator",
    "min_l2_interpolator",
]

ESTIMATOR_KINDS = ("adversarial", "lasso", "ridge", "sqrt_lasso", "ols", "min_l1_interp", "min_l2_interp")


@dataclass(frozen=True)
class EstimatorSpec:
    """Which estimator to fit and with what parameters."""

    kind: str
    budget: AttackBudget | None = None
    delta: float = 0.0
    config: SolverConfig | None = None

    def __post_init__(self):
        if self.kind not in ESTIMATOR_KINDS:
            raise ValueError(f"unknown estimator kind {self.kind!r}")
        if self.kind == "adversarial" and self.budget is None:
            raise ValueError("adversarial estimator requires an AttackBudget")
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")


def _as_beta0(beta0, m: int) -> np.ndarray:
    if beta0 is None:
        return np.zeros(m)
    beta0 = np.asarray(beta0, dtype=np.float64)
    if beta0.shape != (m,):
        raise DataValidationError(f"warm start must have shape ({m},)")
    return beta0.copy()


def _row_qr(X: np.ndarray):
    """Economic QR of X^T with a rank check; None when rank(X) < n."""
    n, m = X.shape
    if n > m:
        return None
    Qt, R = scipy.linalg.qr(X.T, mode="economic")
    diag = np.abs(np.diag(R))
    tol = max(n, m) * np.finfo(np.float64).eps * (diag.max() if diag.size else 0.0)
    if diag.size < n or np.any(diag <= tol):
        return None
    return Qt, R


def _train_mse(X, y, beta) -> float:
    r = y - X @ beta
    return float(r @ r) / y.shape[0]


# ---------------------------------------------------------------------------
# closed-form estimators


def fit_ols(data: Dataset) -> FitResult:
    """Least squares; minimum-norm solution when X is rank deficient."""
    X, y = data.X, data.y
    beta, *_ = np.linalg.lstsq(X, y, rcond=None)
    r = y - X @ beta
    grad = (2.0 / data.n) * (X.T @ r)
    scale = max(1.0, (2.0 / data.n) * float(np.linalg.norm(X.T @ y)))
    resid = float(np.linalg.norm(grad))
    return FitResult(
        beta=beta,
        objective=_train_mse(X, y, beta),
        iterations=1,
        converged=resid <= 1e-10 * scale,
        optimality_residual=resid,
        method_tag="ols",
    )


def fit_ridge(data: Dataset, delta: float) -> FitResult:
    """Solve (X'X + n*delta*I) beta = X'y.

    Requires delta > 0, or delta = 0 with X of full column rank (the system
    is singular otherwise).
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    X, y = data.X, data.y
    n, m = data.n, data.m
    G = X.T @ X + n * float(delta) * np.eye(m)
    rhs = X.T @ y
    if delta == 0.0:
        if np.linalg.matrix_rank(X) < m:
            raise RankDeficiencyError("ridge with delta=0 requires full column rank")
        beta = np.linalg.lstsq(X, y, rcond=None)[0]
    else:
        c, low = scipy.linalg.cho_factor(G)
        beta = scipy.linalg.cho_solve((c, low), rhs)
    resid = float(np.linalg.norm(G @ beta - rhs)) / max(1.0, float(np.linalg.norm(rhs)))
    obj = _train_mse(X, y, beta) + float(delta) * float(beta @ beta)
    return FitResult(
        beta=beta,
        objective=obj,
        iterations=1,
        converged=resid <= 1e-10,
        optimality_residual=resid,
        method_tag="ridge",
    )


def min_l2_interpolator(data: Dataset) -> FitResult:
    """Smallest-l2-norm solution of X beta = y, via QR of X^T.

    The solution lies in the row space of X by construction.  Requires full
    row rank.
    """
    qr = _row_qr(data.X)
    if qr is None:
        raise RankDeficiencyError("minimum-norm interpolation requires full row rank")
    Qt, R = qr
    c = scipy.linalg.solve_triangular(R, data.y, trans="T", lower=False)
    beta = Qt @ c
    feas = float(np.linalg.norm(data.X @ beta - data.y)) / max(1.0, float(np.linalg.norm(data.y)))
    return FitResult(
        beta=beta,
        objective=float(np.linalg.norm(beta)),
        iterations=1,
        converged=feas <= 1e-9,
        optimality_residual=feas,
        method_tag="min_l2_interp",
    )


# ---------------------------------------------------------------------------
# minimum-l1 interpolation (ADMM basis pursuit + support polish)


def _l1_polish(X, z, y, support_tol=1e-7):
    """Exact vertex solve on the support of z, with an LP dual certificate.

    Returns (beta, gap, dual_feasibility) or None when the support is too
    large or the restricted system is inconsistent.
    """
    n, m = X.shape
    S = np.abs(z) > support_tol * max(1.0, float(np.abs(z).max()))
    ns = int(S.sum())
    if ns == 0 or ns > n:
        return None
    XS = X[:, S]
    bS, *_ = np.linalg.lstsq(XS, y, rcond=None)
    if np.linalg.norm(XS @ bS - y) > 1e-9 * max(1.0, float(np.linalg.norm(y))):
        return None
    beta = np.zeros(m)
    beta[S] = bS
    nu, *_ = np.linalg.lstsq(XS.T, np.sign(bS), rcond=None)
    dual_feas = float(np.abs(X.T @ nu).max())
    nu_f = nu / max(1.0, dual_feas)
    gap = float(np.abs(beta).sum() - y @ nu_f)
    return beta, gap, dual_feas


def min_l1_interpolator(data: Dataset, config: SolverConfig | None = None) -> FitResult:
    """Smallest-l1-norm solution of X beta = y.

    ADMM on the split (projection onto the affine set, soft thresholding)
    with over-relaxation; every few hundred iterations the current support
    is polished by an exact restricted solve and checked against the dual
    problem max y'nu subject to ||X'nu||_inf <= 1.  The reported
    optimality_residual is the relative duality gap, which upper-bounds the
    relative suboptimality of the returned value.
    """
    config = config or SolverConfig()
    X, y = data.X, data.y
    n, m = data.n, data.m
    qr = _row_qr(X)
    if qr is None:
        raise RankDeficiencyError("minimum-norm interpolation requires full row rank")
    Qt, R = qr
    b_feas = Qt @ scipy.linalg.solve_triangular(R, y, trans="T", lower=False)

    def proj(v):
        return v - Qt @ (Qt.T @ v) + b_feas

    def raw_certificate(b_pt, u_vec, rho):
        w = X @ (rho * u_vec)
        nu = scipy.linalg.solve_triangular(
            R, scipy.linalg.solve_triangular(R, w, trans="T", lower=False), lower=False
        )
        nu_f = nu / max(1.0, float(np.abs(X.T @ nu).max()))
        return float(np.abs(b_pt).sum() - y @ nu_f)

    rho, alpha = 1.0, 1.8
    z = b_feas.copy()
    u = np.zeros(m)
    gap_tol = max(config.tolerance, 1e-9)
    best = None  # (beta, rel_gap)
    it = 0
    poll = 250
    max_iter = config.max_iterations
    while it < max_iter:
        b = proj(z - u)
        bh = alpha * b + (1.0 - alpha) * z
        z = np.sign(bh + u) * np.maximum(np.abs(bh + u) - 1.0 / rho, 0.0)
        u = u + bh - z
        it += 1
        if it % poll == 0 or it == max_iter:
            pol = _l1_polish(X, z, y)
            if pol is not None:
                beta_p, gap_p, _ = pol
                rel = abs(gap_p) / max(1.0, float(np.abs(beta_p).sum()))
                if best is None or np.abs(beta_p).sum() < np.abs(best[0]).sum():
                    best = (beta_p, rel)
                if rel <= gap_tol:
                    break
            b_now = proj(z - u)
            gap_raw = raw_certificate(b_now, u, rho)
            rel_raw = abs(gap_raw) / max(1.0, float(np.abs(b_now).sum()))
            if best is None or np.abs(b_now).sum() < np.abs(best[0]).sum():
                best = (b_now, rel_raw)
            if rel_raw <= gap_tol:
                break
    if best is None:
        b_now = proj(z - u)
        best = (b_now, abs(raw_certificate(b_now, u, rho)) / max(1.0, float(np.abs(b_now).sum())))
    beta, rel_gap = best
    feas = float(np.linalg.norm(X @ beta - y)) / max(1.0, float(np.linalg.norm(y)))
    return FitResult(
        beta=beta,
        objective=float(np.abs(beta).sum()),
        iterations=it,
        converged=rel_gap <= gap_tol and feas <= 1e-7,
        optimality_residual=rel_gap,
        method_tag="min_l1_interp",
        diagnostics={"feasibility": feas},
    )


# ---------------------------------------------------------------------------
# lasso


def fit_lasso(data: Dataset, delta: float, config: SolverConfig | None = None, beta0=None) -> FitResult:
    """Cyclic coordinate descent for mean squared error + delta * ||beta||_1.

    At exit the per-coordinate zero-subgradient conditions hold within the
    configured tolerance: |(2/n) x_j'(y - X beta)| <= delta for beta_j = 0
    and equal to delta * sign(beta_j) otherwise.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    config = config or SolverConfig()
    X, y = data.X, data.y
    n, m = data.n, data.m
    if delta == 0.0:
        res = fit_ols(data)
        obj = _train_mse(X, y, res.beta)
        return FitResult(
            beta=res.beta,
            objective=obj,
            iterations=res.iterations,
            converged=res.converged,
            optimality_residual=res.optimality_residual,
            method_tag="lasso",
        )
    scale = max(1.0, (2.0 / n) * float(np.abs(X.T @ y).max()))
    kkt_tol = config.tolerance * scale
    XT = np.ascontiguousarray(X.T)
    beta, sweeps, kkt = lasso_cd(XT, y.copy(), float(delta), _as_beta0(beta0, m), config.max_iterations, kkt_tol)
    obj = _train_mse(X, y, beta) + float(delta) * float(np.abs(beta).sum())
    return FitResult(
        beta=beta,
        objective=obj,
        iterations=int(sweeps),
        converged=kkt <= kkt_tol,
        optimality_residual=float(kkt),
        method_tag="lasso",
    )


# ---------------------------------------------------------------------------
# smoothing ladder shared by adversarial training and square-root lasso


def _run_ladder(kind, X, y, delta, beta, stages, per_stage_cap, gscale, ftol=1e-16):
    total = 0
    for eps in stages:
        gtol = gscale * max(1e-12, 0.03 * eps)
        beta, _, _, its = lbfgs_smoothed(kind, X, y, float(delta), float(eps), beta, per_stage_cap, gtol, ftol, 10)
        total += int(its)
    return beta, total


def _structure(X, y, beta, r_cut, b_cut):
    r = y - X @ beta
    y_scale = max(1.0, float(np.abs(y).max()))
    b_scale = max(1.0, float(np.abs(beta).max()) if beta.size else 1.0)
    Z = np.abs(r) <= r_cut * y_scale
    S = np.abs(beta) > b_cut * b_scale
    tau = np.where(Z, 0.0, np.sign(r))
    return S, Z, tau


def _polish_adv_q1(X, y, delta, beta_in, max_rounds=6):
    """Exact solve of the adversarial (q=1) problem restricted to a structure.

    With the support S, coefficient signs sigma, residual signs tau, and the
    set Z of exactly-interpolated samples fixed, the objective is a linear
    least squares in beta_S subject to X[Z,S] beta_S = y[Z]; iterate until
    the structure reaches a fixed point.
    """
    n, m = X.shape
    beta = beta_in.copy()
    r_cut, b_cut = 1e-6, 1e-6
    prev_key = None
    for _ in range(max_rounds):
        S, Z, tau = _structure(X, y, beta, r_cut, b_cut)
        if not S.any():
            return np.zeros(m)
        key = (S.tobytes(), Z.tobytes(), np.sign(beta[S]).tobytes(), tau.tobytes())
        if key == prev_key:
            break
        prev_key = key
        sigma = np.sign(beta[S])
        sigma[sigma == 0.0] = 1.0
        XS = X[:, S]
        rows = tau[:, None] * XS - delta * sigma[None, :]  # target tau_i*y_i; Z rows become -delta*sigma
        target = tau * y
        if Z.any():
            XZ = XS[Z]
            bp, *_ = np.linalg.lstsq(XZ, y[Z], rcond=None)
            if np.linalg.norm(XZ @ bp - y[Z]) > 1e-8 * max(1.0, float(np.linalg.norm(y))):
                break
            N = scipy.linalg.null_space(XZ)
            if N.shape[1] == 0:
                bS = bp
            else:
                w, *_ = np.linalg.lstsq(rows @ N, target - rows @ bp, rcond=None)
                bS = bp + N @ w
        else:
            bS, *_ = np.linalg.lstsq(rows, target, rcond=None)
        beta = np.zeros(m)
        beta[S] = bS
        r_cut, b_cut = 1e-9, 1e-9
    return beta


def _polish_adv_q2(X, y, delta, beta_in, max_rounds=8, newton_steps=30):
    """Newton polish of the adversarial (q=2) problem on a fixed structure.

    Residual signs tau and the interpolated set Z are frozen; the smooth
    restricted objective is minimized over {beta : X[Z] beta = y[Z]} by
    damped Newton with an exact-objective line search.
    """
    n, m = X.shape
    beta = beta_in.copy()
    r_cut = 1e-6
    prev_key = None
    for _ in range(max_rounds):
        _, Z, tau = _structure(X, y, beta, r_cut, 0.0)
        if Z.all():
            break  # fully interpolating: handled by the interpolator candidate
        key = (Z.tobytes(), tau.tobytes())
        if key == prev_key:
            break
        prev_key = key
        if Z.any():
            XZ = X[Z]
            bp, *_ = np.linalg.lstsq(XZ, y[Z], rcond=None)
            if np.linalg.norm(XZ @ bp - y[Z]) > 1e-8 * max(1.0, float(np.linalg.norm(y))):
                break
            N = scipy.linalg.null_space(XZ)
            if N.shape[1] == 0:
                break
        else:
            bp = np.zeros(m)
            N = np.eye(m)
        w = N.T @ (beta - bp)
        obj_prev = None
        for _ in range(newton_steps):
            b_cur = bp + N @ w
            a = float(np.linalg.norm(b_cur))
            if a <= 1e-300:
                break
            u = b_cur / a
            r = y - X @ b_cur
            f = tau * r + delta * a  # tau is 0 on Z, leaving exactly delta*a there
            grads = -(tau[:, None] * X) + delta * u[None, :]
            g = (2.0 / n) * (grads.T @ f)
            H = (2.0 / n) * (grads.T @ grads + float(f.sum()) * (delta / a) * (np.eye(m) - np.outer(u, u)))
            gw = N.T @ g
            Hw = N.T @ H @ N
            gn = float(np.linalg.norm(gw))
            if gn <= 1e-14 * max(1.0, abs(float(f @ f) / n)):
                break
            lam = 1e-12 * max(1.0, float(np.trace(Hw)) / max(1, Hw.shape[0]))
            try:
                step = np.linalg.solve(Hw + lam * np.eye(Hw.shape[0]), -gw)
            except np.linalg.LinAlgError:
                break
            obj_cur = float(f @ f) / n
            t = 1.0
            improved = False
            for _ in range(40):
                w_try = w + t * step
                b_try = bp + N @ w_try
                r_try = y - X @ b_try
                f_try = np.abs(r_try) + delta * float(np.linalg.norm(b_try))
                obj_try = float(f_try @ f_try) / n
                if obj_try <= obj_cur - 1e-12 * abs(obj_cur):
                    w = w_try
                    improved = True
                    break
                t *= 0.5
            if not improved:
                break
            if obj_prev is not None and abs(obj_prev - obj_cur) <= 1e-16 * max(1.0, obj_cur):
                break
            obj_prev = obj_cur
        beta = bp + N @ w
        r_cut = 1e-9
    return beta


def _polish_sqrt_lasso(X, y, delta, beta_in, max_rounds=6):
    """Closed-form support polish for ||y - X beta||_2 + delta ||beta||_1.

    On a fixed support with signs sigma and nonzero residual, stationarity
    gives X_S' r = ||r|| * delta * sigma, solvable in closed form from the
    orthogonal complement of col(X_S).
    """
    n, m = X.shape
    beta = beta_in.copy()
    b_cut = 1e-6
    prev_key = None
    for _ in range(max_rounds):
        b_scale = max(1.0, float(np.abs(beta).max()))
        S = np.abs(beta) > b_cut * b_scale
        if not S.any():
            return np.zeros(m)
        key = (S.tobytes(), np.sign(beta[S]).tobytes())
        if key == prev_key:
            break
        prev_key = key
        sigma = np.sign(beta[S])
        sigma[sigma == 0.0] = 1.0
        XS = X[:, S]
        Qs, Rs = scipy.linalg.qr(XS, mode="economic")
        diag = np.abs(np.diag(Rs))
        if diag.size == 0 or diag.min() <= 1e-12 * max(1.0, diag.max()):
            break
        r_perp = y - Qs @ (Qs.T @ y)
        v = Qs @ scipy.linalg.solve_triangular(Rs, delta * sigma, trans="T", lower=False)
        vn2 = float(v @ v)
        if vn2 >= 1.0 - 1e-12:
            break  # this support cannot host an interior optimum at this delta
        rn = float(np.linalg.norm(r_perp)) / np.sqrt(1.0 - vn2)
        r = r_perp + rn * v
        bS = scipy.linalg.solve_triangular(Rs, Qs.T @ (y - r), lower=False)
        beta = np.zeros(m)
        beta[S] = bS
        b_cut = 1e-9
    return beta


# ---------------------------------------------------------------------------
# adversarial training and square-root lasso drivers


def _pick_best(cands, value):
    names, betas = zip(*cands)
    vals = [value(b) for b in betas]
    k = int(np.argmin(vals))
    return names[k], betas[k], vals[k]


def fit_adversarial(
    data: Dataset,
    budget: AttackBudget,
    config: SolverConfig | None = None,
    beta0=None,
    interp_candidate=None,
) -> FitResult:
    """Minimize the empirical adversarial risk for sup-norm or Euclidean attacks.

    Strategy: smoothing-continuation L-BFGS to locate the active structure,
    an exact structure polish, and candidate comparison on the exact risk
    (zero, warm start, and - for full-row-rank designs - the minimum-norm
    interpolator, which is the exact solution for small radii).  The winner
    is certified by the subdifferential distance reported in
    optimality_residual; convergence means it fell below
    tolerance * max(1, ||(2/n) X'y||).

    interp_candidate lets callers (e.g. path sweeps) pass a precomputed
    minimum-q-norm interpolating solution instead of recomputing one.
    """
    config = config or SolverConfig()
    X, y = data.X, data.y
    n, m = data.n, data.m
    delta = budget.delta
    q = budget.q
    tag = "adversarial_l2" if budget.p == 2.0 else "adversarial_linf"

    if delta == 0.0:
        res = fit_ols(data)
        return FitResult(
            beta=res.beta,
            objective=res.objective,
            iterations=res.iterations,
            converged=res.converged,
            optimality_residual=res.optimality_residual,
            method_tag=tag,
        )

    kind = OBJ_ADV_Q2 if q == 2.0 else OBJ_ADV_Q1
    gscale = max(1.0, (2.0 / n) * float(np.linalg.norm(X.T @ y)))
    tol_abs = config.tolerance * gscale
    risk = lambda b: _obj.adv_risk(b, data, budget)

    cands = [("zero", np.zeros(m))]
    if beta0 is not None:
        cands.append(("warm_start", _as_beta0(beta0, m)))
    if interp_candidate is not None:
        cands.append(("interpolator", np.asarray(interp_candidate, dtype=np.float64)))
    else:
        qr = _row_qr(X)
        if qr is not None:
            if q == 2.0:
                cands.append(("interpolator", min_l2_interpolator(data).beta))
            else:
                cands.append(("interpolator", min_l1_interpolator(data, config).beta))

    stages_all = config.stages()
    stages_main = [e for e in stages_all if e >= 1e-6] or stages_all[:1]
    stages_deep = [e for e in stages_all if e < 1e-6]
    start = _as_beta0(beta0, m)
    cap_main = int(max(200, min(3000, config.max_iterations // max(1, 2 * len(stages_all)))))
    b_ladder, iters = _run_ladder(kind, X, y, delta, start, stages_main, cap_main, gscale)
    cands.append(("ladder", b_ladder))
    polish = _polish_adv_q1 if q == 1.0 else _polish_adv_q2
    cands.append(("polish", polish(X, y, delta, b_ladder)))

    name, beta, obj = _pick_best(cands, risk)
    dist = _obj.adv_subgradient_distance(beta, data, budget)
    if dist > tol_abs and stages_deep and iters < config.max_iterations:
        cap_deep = int(max(500, min(10000, (config.max_iterations - iters) // max(1, len(stages_deep)))))
        b_deep, extra = _run_ladder(kind, X, y, delta, beta.copy(), stages_deep, cap_deep, gscale)
        iters += extra
        cands.append(("ladder_deep", b_deep))
        cands.append(("polish_deep", polish(X, y, delta, b_deep)))
        name, beta, obj = _pick_best(cands, risk)
        dist = _obj.adv_subgradient_distance(beta, data, budget)
    return FitResult(
        beta=beta,
        objective=obj,
        iterations=iters,
        converged=dist <= tol_abs,
        optimality_residual=dist,
        method_tag=tag,
        diagnostics={"winning_candidate": name, "stationarity_scale": gscale},
    )


def fit_sqrt_lasso(
    data: Dataset,
    delta: float,
    config: SolverConfig | None = None,
    beta0=None,
    interp_candidate=None,
) -> FitResult:
    """Minimize ||y - X beta||_2 + delta ||beta||_1.

    Same machinery as adversarial training: smoothing ladder, closed-form
    support polish, candidate comparison, and a subgradient-distance
    certificate.
    """
    if delta < 0:
        raise ValueError("delta must be nonnegative")
    config = config or SolverConfig()
    X, y = data.X, data.y
    n, m = data.n, data.m
    if delta == 0.0:
        res = fit_ols(data)
        obj = float(np.linalg.norm(y - X @ res.beta))
        return FitResult(
            beta=res.beta,
            objective=obj,
            iterations=res.iterations,
            converged=res.converged,
            optimality_residual=res.optimality_residual,
            method_tag="sqrt_lasso",
        )
    gscale = max(1.0, float(np.abs(X.T @ y).max()) / max(1e-300, float(np.linalg.norm(y))))
    tol_abs = config.tolerance * gscale
    value = lambda b: _obj.robust_risk_featurewise(b, data, delta)

    cands = [("zero", np.zeros(m))]
    if beta0 is not None:
        cands.append(("warm_start", _as_beta0(beta0, m)))
    if interp_candidate is not None:
        cands.append(("interpolator", np.asarray(interp_candidate, dtype=np.float64)))
    elif _row_qr(X) is not None:
        cands.append(("interpolator", min_l1_interpolator(data, config).beta))

    stages_all = config.stages()
    stages_main = [e for e in stages_all if e >= 1e-6] or stages_all[:1]
    stages_deep = [e for e in stages_all if e < 1e-6]
    cap_main = int(max(200, min(3000, config.max_iterations // max(1, 2 * len(stages_all)))))
    b_ladder, iters = _run_ladder(OBJ_SQRT_LASSO, X, y, delta, _as_beta0(beta0, m), stages_main, cap_main, gscale)
    cands.append(("ladder", b_ladder))
    cands.append(("polish", _polish_sqrt_lasso(X, y, delta, b_ladder)))

    name, beta, obj = _pick_best(cands, value)
    dist = _obj.sqrt_lasso_subgradient_distance(beta, data, delta)
    if dist > tol_abs and stages_deep and iters < config.max_iterations:
        cap_deep = int(max(500, min(10000, (config.max_iterations - iters) // max(1, len(stages_deep)))))
        b_deep, extra = _run_ladder(OBJ_SQRT_LASSO, X, y, delta, beta.copy(), stages_deep, cap_deep, gscale)
        iters += extra
        cands.append(("ladder_deep", b_deep))
        cands.append(("polish_deep", _polish_sqrt_lasso(X, y, delta, b_deep)))
        name, beta, obj = _pick_best(cands, value)
        dist = _obj.sqrt_lasso_subgradient_distance(beta, data, delta)
    return FitResult(
        beta=beta,
        objective=obj,
        iterations=iters,
        converged=dist <= tol_abs,
        optimality_residual=dist,
        method_tag="sqrt_lasso",
        diagnostics={"winning_candidate": name, "stationarity_scale": gscale},
    )


def fit(data: Dataset, spec: EstimatorSpec, beta0=None, interp_candidate=None) -> FitResult:
    """Dispatch to the estimator named by spec."""
    if spec.kind == "adversarial":
        return fit_adversarial(data, spec.budget, spec.config, beta0=beta0, interp_candidate=interp_candidate)
    if spec.kind == "lasso":
        return fit_lasso(data, spec.delta, spec.config, beta0=beta0)
    if spec.kind == "ridge":
        return fit_ridge(data, spec.delta)
    if spec.kind == "sqrt_lasso":
        return fit_sqrt_lasso(data, spec.delta, spec.config, beta0=beta0, interp_candidate=interp_candidate)
    if spec.kind == "ols":
        return fit_ols(data)
    if spec.kind == "min_l1_interp":
        return min_l1_interpolator(data, spec.config)
    return min_l2_interpolator(data)
