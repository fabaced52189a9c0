"""Synthetic generators, regularization paths, sweeps, and metrics.

Two data models: isotropic Gaussian features with a linear response, and a
latent-factor model where features are noisy views of a lower-dimensional
subspace.  Path and sweep drivers reproduce the characteristic abrupt
transition of adversarial training into the interpolation regime.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import solvers as _solvers
from .core import AttackBudget, DataValidationError, Dataset, RngSeed, SolverConfig
from .solvers import EstimatorSpec

NONZERO_TOL = 1e-8
TRANSITION_TOL = 1e-6
DEFAULT_SWEEP_DELTAS = (0.5, 0.1, 0.05, 0.01)
PATH_GRID_SIZE = 200

__all__ = [
    "NONZERO_TOL",
    "TRANSITION_TOL",
    "DEFAULT_SWEEP_DELTAS",
    "PATH_GRID_SIZE",
    "IsotropicSpec",
    "LatentSpec",
    "LatentTruth",
    "PathRecord",
    "SweepRecord",
    "EvalMetrics",
    "generate_isotropic",
    "generate_latent",
    "sample_isotropic",
    "sample_latent",
    "log_delta_grid",
    "regularization_path",
    "detect_interpolation_transition",
    "feature_sweep",
    "metrics",
]


@dataclass(frozen=True)
class IsotropicSpec:
    """Gaussian features x_i ~ N(0, r2 I_m); y_i = x_i' beta* + noise.

    beta* is drawn N(0, 1/m) per coordinate so the signal power stays O(1)
    across feature-count sweeps.
    """

    n: int
    m: int
    r2: float = 4.0
    sigma2: float = 1.0
    beta_star_seed: RngSeed = RngSeed(0)
    noise_seed: RngSeed = RngSeed(1)

    def __post_init__(self):
        if self.n < 1 or self.m < 1:
            raise ValueError("n and m must be positive")
        if self.r2 <= 0:
            raise ValueError("r2 must be positive")
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")


@dataclass(frozen=True)
class LatentSpec:
    """Features x = W z + u observing a d-dimensional latent vector z.

    W has orthogonal columns with W'W = (m/d) I_d, which keeps the feature
    signal-to-noise ratio constant as m grows; y = theta' z + xi.
    """

    n: int
    m: int
    d: int = 20
    sigma_xi: float = 0.1
    seed: RngSeed = RngSeed(0)

    def __post_init__(self):
        if self.n < 1 or self.m < 1 or self.d < 1:
            raise ValueError("n, m, d must be positive")
        if self.m < self.d:
            raise ValueError("latent model requires m >= d")
        if self.sigma_xi < 0:
            raise ValueError("sigma_xi must be nonnegative")


@dataclass(frozen=True)
class LatentTruth:
    """Ground truth of a latent draw: the observation map W and coefficients theta."""

    W: np.ndarray
    theta: np.ndarray


@dataclass(frozen=True)
class PathRecord:
    """One regularization-path entry: coefficients and train metrics at one delta."""

    delta: float
    beta: np.ndarray
    train_mse: float
    train_adv_objective: float
    l1_norm: float
    l2_norm: float
    nonzero_count: int
    converged: bool = True


@dataclass(frozen=True)
class SweepRecord:
    """Quantile summaries over repetitions for one (m, delta, estimator) cell."""

    m: int
    delta: float
    estimator: str
    train_mse: tuple[float, float, float]  # (q25, median, q75)
    test_mse: tuple[float, float, float]
    l2_norm: tuple[float, float, float]
    repetitions: int


@dataclass(frozen=True)
class EvalMetrics:
    train_mse: float
    test_mse: float
    nmse: float
    l1_norm: float
    l2_norm: float
    nonzero_count: int


def sample_isotropic(beta_star: np.ndarray, n: int, r2: float, sigma2: float, rng: np.random.Generator) -> Dataset:
    """Fresh draw from the isotropic model with a fixed ground truth."""
    m = beta_star.shape[0]
    X = rng.normal(0.0, np.sqrt(r2), size=(n, m))
    eps = rng.normal(0.0, np.sqrt(sigma2), size=n) if sigma2 > 0 else np.zeros(n)
    return Dataset(X, X @ beta_star + eps)


def generate_isotropic(spec: IsotropicSpec) -> tuple[Dataset, np.ndarray]:
    """Dataset plus the ground-truth coefficient vector; deterministic per seed."""
    rng_b = spec.beta_star_seed.generator()
    beta_star = rng_b.normal(0.0, np.sqrt(1.0 / spec.m), size=spec.m)
    data = sample_isotropic(beta_star, spec.n, spec.r2, spec.sigma2, spec.noise_seed.generator())
    return data, beta_star


def sample_latent(truth: LatentTruth, n: int, sigma_xi: float, rng: np.random.Generator) -> Dataset:
    """Fresh draw from the latent model with a fixed (W, theta)."""
    m, d = truth.W.shape
    z = rng.normal(size=(n, d))
    u = rng.normal(size=(n, m))
    xi = rng.normal(0.0, sigma_xi, size=n) if sigma_xi > 0 else np.zeros(n)
    return Dataset(z @ truth.W.T + u, z @ truth.theta + xi)


def generate_latent(spec: LatentSpec) -> tuple[Dataset, LatentTruth]:
    """Dataset plus the latent ground truth; W'W = (m/d) I_d by construction."""
    rng = spec.seed.generator()
    G = rng.normal(size=(spec.m, spec.d))
    Qm, _ = np.linalg.qr(G)
    W = Qm * np.sqrt(spec.m / spec.d)
    theta = rng.normal(size=spec.d)
    truth = LatentTruth(W=W, theta=theta)
    return sample_latent(truth, spec.n, spec.sigma_xi, rng), truth


def log_delta_grid(delta_min: float, delta_max: float, size: int = PATH_GRID_SIZE) -> np.ndarray:
    """size values equally spaced in log10 between delta_min and delta_max, ascending."""
    if not (0 < delta_min <= delta_max):
        raise ValueError("need 0 < delta_min <= delta_max")
    if size < 1:
        raise ValueError("size must be positive")
    if size == 1:
        return np.array([delta_max])
    return np.logspace(np.log10(delta_min), np.log10(delta_max), size)


def metrics(beta, train: Dataset, test: Dataset | None = None) -> EvalMetrics:
    """Train/test mean squared errors, normalized test MSE, and norms.

    nmse divides the test MSE by the (mean-centered) population variance of
    the test responses; it requires a test set with nonconstant responses.
    """
    beta = np.asarray(beta, dtype=np.float64)
    if beta.shape != (train.m,):
        raise DataValidationError(f"beta must have shape ({train.m},)")
    r = train.y - train.X @ beta
    train_mse = float(r @ r) / train.n
    test_mse = float("nan")
    nmse = float("nan")
    if test is not None:
        if test.m != train.m:
            raise DataValidationError("train and test feature counts differ")
        rt = test.y - test.X @ beta
        test_mse = float(rt @ rt) / test.n
        var = float(np.var(test.y))
        if var <= 0.0:
            raise DataValidationError("nmse undefined: test responses have zero variance")
        nmse = test_mse / var
    return EvalMetrics(
        train_mse=train_mse,
        test_mse=test_mse,
        nmse=nmse,
        l1_norm=float(np.abs(beta).sum()),
        l2_norm=float(np.linalg.norm(beta)),
        nonzero_count=int(np.sum(np.abs(beta) > NONZERO_TOL)),
    )


_PATH_KINDS = ("adversarial", "lasso", "ridge", "sqrt_lasso")


def _interp_candidate_for(data: Dataset, kind: str, p: float | None, config: SolverConfig):
    """Precompute the minimum-norm interpolating candidate shared along a path."""
    if kind not in ("adversarial", "sqrt_lasso"):
        return None
    if _solvers._row_qr(data.X) is None:
        return None
    if kind == "adversarial" and p == 2.0:
        return _solvers.min_l2_interpolator(data).beta
    return _solvers.min_l1_interpolator(data, config).beta


def regularization_path(
    data: Dataset,
    kind: str,
    delta_grid,
    config: SolverConfig | None = None,
    p: float | None = None,
) -> list[PathRecord]:
    """Fit one estimator over a grid of regularization strengths.

    Fits run from the largest delta down, warm-starting each fit from the
    previous solution; records are returned sorted ascending by delta.
    Individual non-converged fits are flagged on their record rather than
    aborting the path.
    """
    config = config or SolverConfig()
    if kind not in _PATH_KINDS:
        raise ValueError(f"no regularization path for estimator kind {kind!r}")
    grid = np.asarray(delta_grid, dtype=np.float64)
    if grid.size == 0:
        raise ValueError("empty delta grid")
    if np.any(grid <= 0) or not np.all(np.isfinite(grid)):
        raise ValueError("delta grid must be positive and finite")
    order = np.argsort(grid)[::-1]
    interp = _interp_candidate_for(data, kind, p, config)
    records: list[PathRecord] = []
    warm = None
    for idx in order:
        delta = float(grid[idx])
        if kind == "adversarial":
            res = _solvers.fit_adversarial(
                data, AttackBudget(delta=delta, p=p if p is not None else np.inf),
                config, beta0=warm, interp_candidate=interp,
            )
        elif kind == "lasso":
            res = _solvers.fit_lasso(data, delta, config, beta0=warm)
        elif kind == "ridge":
            res = _solvers.fit_ridge(data, delta)
        else:
            res = _solvers.fit_sqrt_lasso(data, delta, config, beta0=warm, interp_candidate=interp)
        warm = res.beta
        ev = metrics(res.beta, data)
        records.append(
            PathRecord(
                delta=delta,
                beta=res.beta,
                train_mse=ev.train_mse,
                train_adv_objective=res.objective,
                l1_norm=ev.l1_norm,
                l2_norm=ev.l2_norm,
                nonzero_count=ev.nonzero_count,
                converged=res.converged,
            )
        )
    records.sort(key=lambda rec: rec.delta)
    return records


def detect_interpolation_transition(path: list[PathRecord], tol: float = TRANSITION_TOL) -> float:
    """Empirical interpolation threshold of a path.

    Scanning the grid in ascending delta, returns the largest delta whose
    train MSE is at most tol with every smaller grid delta also at most tol;
    0 when even the smallest delta fails.
    """
    if not path:
        raise ValueError("empty path")
    records = sorted(path, key=lambda rec: rec.delta)
    threshold = 0.0
    for rec in records:
        if rec.train_mse <= tol:
            threshold = rec.delta
        else:
            break
    return threshold


SWEEP_ESTIMATORS = ("ridge", "lasso", "sqrt_lasso", "adv_inf", "adv_l2", "ols", "min_l1", "min_l2")
_DELTA_FREE = ("ols", "min_l1", "min_l2")
_DELTA_FREE_SENTINEL = 2**32 - 1


def _sweep_estimator_spec(name: str, delta: float, config: SolverConfig) -> EstimatorSpec:
    if name == "adv_inf":
        return EstimatorSpec(kind="adversarial", budget=AttackBudget(delta=delta, p=np.inf), config=config)
    if name == "adv_l2":
        return EstimatorSpec(kind="adversarial", budget=AttackBudget(delta=delta, p=2.0), config=config)
    if name == "min_l1":
        return EstimatorSpec(kind="min_l1_interp", config=config)
    if name == "min_l2":
        return EstimatorSpec(kind="min_l2_interp", config=config)
    return EstimatorSpec(kind=name, delta=delta, config=config)


def _sweep_cell(args):
    """One (m, delta, repetition) cell: draw data, fit every estimator.

    The cell seed depends only on (base seed, m, delta index, repetition), so
    execution order and parallelism never change results.
    """
    base_seed, m, delta_idx, delta, rep, estimator_names, spec_kw, n_test, tol = args
    ss = np.random.SeedSequence([int(base_seed), int(m), int(delta_idx), int(rep)])
    s_beta, s_train, s_test = [int(v) for v in ss.generate_state(3, dtype=np.uint64)]
    config = SolverConfig(tolerance=tol)
    if spec_kw["kind"] == "isotropic":
        spec = IsotropicSpec(
            n=spec_kw["n"], m=m, r2=spec_kw["r2"], sigma2=spec_kw["sigma2"],
            beta_star_seed=RngSeed(s_beta), noise_seed=RngSeed(s_train),
        )
        train, beta_star = generate_isotropic(spec)
        test = sample_isotropic(beta_star, n_test, spec_kw["r2"], spec_kw["sigma2"], RngSeed(s_test).generator())
    else:
        spec = LatentSpec(
            n=spec_kw["n"], m=m, d=spec_kw["d"], sigma_xi=spec_kw["sigma_xi"], seed=RngSeed(s_beta),
        )
        train, truth = generate_latent(spec)
        test = sample_latent(truth, n_test, spec_kw["sigma_xi"], RngSeed(s_test).generator())
    rows = []
    for name in estimator_names:
        est_spec = _sweep_estimator_spec(name, delta, config)
        try:
            res = _solvers.fit(train, est_spec)
            ev = metrics(res.beta, train, test)
            rows.append((m, delta, name, rep, ev.train_mse, ev.test_mse, ev.l2_norm, res.converged, ""))
        except (ValueError, np.linalg.LinAlgError) as exc:  # recorded, never aborts the sweep
            rows.append((m, delta, name, rep, np.nan, np.nan, np.nan, False, str(exc)))
    return rows


def feature_sweep(
    base_spec,
    m_grid,
    delta_set=DEFAULT_SWEEP_DELTAS,
    repetitions: int = 10,
    estimators=("ridge", "lasso", "adv_inf", "adv_l2"),
    base_seed: int = 0,
    n_test: int = 100,
    tolerance: float = 1e-8,
    jobs: int = 1,
) -> list[SweepRecord]:
    """Train/test error and norm quantiles as the feature count grows.

    base_spec is an IsotropicSpec or LatentSpec whose m is overridden by
    each value of m_grid.  Estimators that take no regularization strength
    run once per (m, repetition) and are recorded with delta = 0.  Failed
    cells are recorded as NaN rather than aborting.
    """
    m_grid = [int(v) for v in m_grid]
    if sorted(m_grid) != m_grid:
        raise ValueError("m_grid must be ascending")
    for name in estimators:
        if name not in SWEEP_ESTIMATORS:
            raise ValueError(f"unknown sweep estimator {name!r}")
    if isinstance(base_spec, IsotropicSpec):
        spec_kw = {"kind": "isotropic", "n": base_spec.n, "r2": base_spec.r2, "sigma2": base_spec.sigma2}
    elif isinstance(base_spec, LatentSpec):
        spec_kw = {"kind": "latent", "n": base_spec.n, "d": base_spec.d, "sigma_xi": base_spec.sigma_xi}
    else:
        raise TypeError("base_spec must be IsotropicSpec or LatentSpec")
    delta_dep = [e for e in estimators if e not in _DELTA_FREE]
    delta_free = [e for e in estimators if e in _DELTA_FREE]
    cells = []
    for m in m_grid:
        for rep in range(repetitions):
            for di, delta in enumerate(delta_set):
                if delta_dep:
                    cells.append((base_seed, m, di, float(delta), rep, delta_dep, spec_kw, n_test, tolerance))
            if delta_free:
                cells.append((base_seed, m, _DELTA_FREE_SENTINEL, 0.0, rep, delta_free, spec_kw, n_test, tolerance))
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            all_rows = [row for rows in pool.map(_sweep_cell, cells) for row in rows]
    else:
        all_rows = [row for cell in cells for row in _sweep_cell(cell)]

    grouped: dict[tuple, list] = {}
    for row in all_rows:
        grouped.setdefault((row[0], row[1], row[2]), []).append(row)
    records = []
    for (m, delta, name), rows in sorted(grouped.items(), key=lambda kv: (kv[0][0], kv[0][1], kv[0][2])):
        def quants(idx):
            vals = np.array([r[idx] for r in rows], dtype=np.float64)
            q25, med, q75 = np.nanquantile(vals, [0.25, 0.5, 0.75])
            return (float(q25), float(med), float(q75))

        records.append(
            SweepRecord(
                m=m, delta=delta, estimator=name,
                train_mse=quants(4), test_mse=quants(5), l2_norm=quants(6),
                repetitions=len(rows),
            )
        )
    return records
