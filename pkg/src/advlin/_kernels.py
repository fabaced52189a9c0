"""Hot numeric kernels.

Every function here is written in nopython-compatible NumPy so the same
source runs either JIT-compiled (numba) or as plain NumPy, selected by
:mod:`advlin._accel`.  Inputs are float64 and C-contiguous; callers are
responsible for casting.
"""

import numpy as np

from ._accel import maybe_jit

# smoothed-objective kinds
OBJ_ADV_Q1 = 0  # mean((|r_i| + delta*||b||_1)^2), l1 regularizer smoothed
OBJ_ADV_Q2 = 1  # mean((|r_i| + delta*||b||_2)^2), l2 regularizer smoothed
OBJ_SQRT_LASSO = 2  # ||r||_2 + delta*||b||_1, both terms smoothed


@maybe_jit
def smoothed_value_grad(kind, X, y, delta, eps, b):
    """Value and gradient of the eps-smoothed objective `kind` at b.

    Absolute values are replaced by sqrt(t^2 + eps^2); norm smoothings keep
    their value at 0 (shifted by the additive constant), so the smoothed and
    exact objectives agree at b = 0 and differ by O(eps) elsewhere.
    """
    n, m = X.shape
    r = y - X @ b
    if kind == OBJ_SQRT_LASSO:
        s = np.sqrt(r @ r + eps * eps)
        t = np.sqrt(b * b + eps * eps)
        obj = (s - eps) + delta * (np.sum(t) - m * eps)
        grad = -(X.T @ r) / s + delta * (b / t)
        return obj, grad
    s = np.sqrt(r * r + eps * eps)
    if kind == OBJ_ADV_Q1:
        t = np.sqrt(b * b + eps * eps)
        nq = np.sum(t) - m * eps
        gn = b / t
    else:
        t = np.sqrt(b @ b + eps * eps)
        nq = t - eps
        gn = b / t
    f = s - eps + delta * nq
    obj = (f @ f) / n
    grad = (2.0 / n) * (-(X.T @ (f * (r / s))) + delta * np.sum(f) * gn)
    return obj, grad


@maybe_jit
def lbfgs_smoothed(kind, X, y, delta, eps, b0, max_iter, gtol, ftol, mem):
    """Minimize the smoothed objective with L-BFGS + Armijo backtracking.

    Returns (b, obj, grad_norm, iterations).  Exits on gradient norm <= gtol,
    on repeated line-search failure, or after three consecutive steps with
    relative objective decrease below ftol.
    """
    m = b0.shape[0]
    b = b0.copy()
    S = np.zeros((mem, m))
    Y = np.zeros((mem, m))
    RHO = np.zeros(mem)
    ALPHA = np.zeros(mem)
    nstored = 0
    head = 0
    f, g = smoothed_value_grad(kind, X, y, delta, eps, b)
    ls_fail = 0
    stall = 0
    it = 0
    gn = np.sqrt(g @ g)
    while it < max_iter:
        if gn <= gtol:
            break
        # two-loop recursion for the quasi-Newton direction
        q = -g
        if nstored > 0:
            for i in range(nstored):
                idx = (head + mem - 1 - i) % mem
                ALPHA[idx] = RHO[idx] * (S[idx] @ q)
                q = q - ALPHA[idx] * Y[idx]
            last = (head + mem - 1) % mem
            q = q * ((S[last] @ Y[last]) / (Y[last] @ Y[last]))
            for i in range(nstored - 1, -1, -1):
                idx = (head + mem - 1 - i) % mem
                bcoef = RHO[idx] * (Y[idx] @ q)
                q = q + (ALPHA[idx] - bcoef) * S[idx]
        dg = g @ q
        if dg >= 0.0:
            q = -g
            dg = -(g @ g)
            nstored = 0
        step = 1.0
        accepted = False
        f_new = f
        g_new = g
        b_new = b
        for _ in range(60):
            b_new = b + step * q
            f_new, g_new = smoothed_value_grad(kind, X, y, delta, eps, b_new)
            if f_new <= f + 1e-4 * step * dg:
                accepted = True
                break
            step *= 0.5
        it += 1
        if not accepted:
            ls_fail += 1
            nstored = 0
            if ls_fail >= 2:
                break
            continue
        ls_fail = 0
        s_vec = b_new - b
        y_vec = g_new - g
        sy = s_vec @ y_vec
        if sy > 1e-12 * np.sqrt((s_vec @ s_vec) * (y_vec @ y_vec)):
            S[head] = s_vec
            Y[head] = y_vec
            RHO[head] = 1.0 / sy
            head = (head + 1) % mem
            if nstored < mem:
                nstored += 1
        df = f - f_new
        b = b_new
        f = f_new
        g = g_new
        gn = np.sqrt(g @ g)
        if df <= ftol * max(1.0, abs(f)):
            stall += 1
            if stall >= 3:
                break
        else:
            stall = 0
    return b, f, gn, it


@maybe_jit
def lasso_cd(XT, y, delta, b0, max_sweeps, kkt_tol):
    """Cyclic coordinate descent for mean((y - Xb)_i^2) + delta*||b||_1.

    XT is X transposed (features x samples, C-contiguous) so that feature
    rows are contiguous.  Each coordinate is minimized exactly by soft
    thresholding.  Returns (b, sweeps, kkt) where kkt is the largest
    violation of the per-coordinate zero-subgradient condition at exit.
    """
    m, n = XT.shape
    b = b0.copy()
    col_sq = np.zeros(m)
    for j in range(m):
        col_sq[j] = XT[j] @ XT[j]
    r = y - XT.T @ b
    thr = 0.5 * n * delta
    kkt = np.inf
    sweeps = 0
    while sweeps < max_sweeps:
        max_change = 0.0
        for j in range(m):
            cj = col_sq[j]
            if cj <= 0.0:
                continue
            bj = b[j]
            if bj != 0.0:
                r = r + XT[j] * bj
            rho = XT[j] @ r
            if rho > thr:
                bnew = (rho - thr) / cj
            elif rho < -thr:
                bnew = (rho + thr) / cj
            else:
                bnew = 0.0
            if bnew != 0.0:
                r = r - XT[j] * bnew
            b[j] = bnew
            change = abs(bnew - bj)
            if change > max_change:
                max_change = change
        sweeps += 1
        # zero-subgradient residual: grad_j = -(2/n) x_j' r
        kkt = 0.0
        for j in range(m):
            gj = -(2.0 / n) * (XT[j] @ r)
            if b[j] > 0.0:
                v = abs(gj + delta)
            elif b[j] < 0.0:
                v = abs(gj - delta)
            else:
                v = abs(gj) - delta
                if v < 0.0:
                    v = 0.0
            if v > kkt:
                kkt = v
        if kkt <= kkt_tol:
            break
    return b, sweeps, kkt


@maybe_jit
def bounded_least_squares(v0, A, lo, hi, B, ball_radius, max_iter, tol):
    """Minimize ||v0 + A t + B u||_2 over box lo <= t <= hi and ||u|| <= radius.

    Projected FISTA with function-value restarts; used to measure the
    distance from the origin to a subdifferential (columns of A and B span
    its free directions).  The returned value is an upper bound on the true
    distance when stopped early, so it never over-certifies stationarity.
    """
    k = A.shape[1]
    kb = B.shape[1]
    if k + kb == 0:
        return np.sqrt(v0 @ v0)
    t = np.zeros(k)
    u = np.zeros(kb)
    t_prev = t.copy()
    u_prev = u.copy()
    # Lipschitz bound 2*||[A B]||^2 via power iteration
    w = np.ones(k + kb) / np.sqrt(float(k + kb))
    L = 1e-12
    for _ in range(40):
        z = A @ w[:k] + B @ w[k:]
        w2 = np.empty(k + kb)
        w2[:k] = A.T @ z
        w2[k:] = B.T @ z
        nw = np.sqrt(w2 @ w2)
        if nw <= 0.0:
            break
        L = nw
        w = w2 / nw
    step = 1.0 / max(2.0 * L, 1e-12)
    theta = 1.0
    best = np.sqrt(v0 @ v0)
    prev_cur = best
    no_improve = 0
    for _ in range(max_iter):
        th_new = 0.5 * (1.0 + np.sqrt(1.0 + 4.0 * theta * theta))
        mom = (theta - 1.0) / th_new
        ty = t + mom * (t - t_prev)
        uy = u + mom * (u - u_prev)
        theta = th_new
        s = v0 + A @ ty + B @ uy
        t_prev = t.copy()
        u_prev = u.copy()
        t = ty - 2.0 * step * (A.T @ s)
        for i in range(k):
            if t[i] < lo[i]:
                t[i] = lo[i]
            elif t[i] > hi[i]:
                t[i] = hi[i]
        if kb > 0:
            u = uy - 2.0 * step * (B.T @ s)
            nu = np.sqrt(u @ u)
            if nu > ball_radius:
                u = u * (ball_radius / nu)
        s_now = v0 + A @ t + B @ u
        cur = np.sqrt(s_now @ s_now)
        if cur > prev_cur:
            theta = 1.0  # momentum restart
        prev_cur = cur
        if cur < best - tol:
            best = cur
            no_improve = 0
        else:
            if cur < best:
                best = cur
            no_improve += 1
            if no_improve >= 150:
                break
    return best
