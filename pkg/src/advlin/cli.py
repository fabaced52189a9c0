"""Command-line driver: fit, path, thresholds, gen, sweep, replay.

Every command writes its primary output atomically plus a JSON manifest
(`<out>.manifest.json`) recording the resolved arguments; `advlin replay
MANIFEST` re-executes a manifest and reproduces the output byte for byte.
Exit codes: 0 success, 1 solver non-convergence (output still written),
2 I/O or validation failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import tempfile
import time

import numpy as np

from . import __version__
from . import experiments as xp
from . import solvers
from . import thresholds as th
from .core import AttackBudget, DataValidationError, Dataset, RankDeficiencyError, RngSeed, SolverConfig

EXIT_OK = 0
EXIT_NOT_CONVERGED = 1
EXIT_INVALID = 2

_METHOD_KINDS = {
    "adv": "adversarial",
    "lasso": "lasso",
    "ridge": "ridge",
    "sqrt-lasso": "sqrt_lasso",
    "ols": "ols",
    "min-l1": "min_l1_interp",
    "min-l2": "min_l2_interp",
}


def fmt(v: float) -> str:
    """Serialize a float with 17 significant digits (round-trip exact)."""
    return "%.17g" % float(v)


def _atomic_write(path: str, payload: str) -> None:
    d = os.path.dirname(os.path.abspath(path)) or "."
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".advlin-", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="") as fh:
            fh.write(payload)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_csv(path: str, header: list[str], rows: list[list]) -> None:
    import io

    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([fmt(v) if isinstance(v, float) else str(v) for v in row])
    _atomic_write(path, buf.getvalue())


def write_json(path: str, doc: dict) -> None:
    _atomic_write(path, json.dumps(doc, indent=2, sort_keys=True) + "\n")


def load_dataset_csv(path: str, target_col: str = "y") -> tuple[Dataset, list[str]]:
    """Read a dataset CSV (header row, one target column, '.' decimals).

    Parse failures report the 1-based line number.  Returns the dataset and
    the feature column names in order.
    """
    if not os.path.exists(path):
        raise FileNotFoundError(f"dataset file not found: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataValidationError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if target_col not in header:
            raise DataValidationError(f"{path}: no column named {target_col!r} in header")
        ti = header.index(target_col)
        feature_names = [h for i, h in enumerate(header) if i != ti]
        xs, ys = [], []
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != len(header):
                raise DataValidationError(
                    f"{path}:{lineno}: expected {len(header)} fields, got {len(row)}"
                )
            try:
                vals = [float(v) for v in row]
            except ValueError as exc:
                raise DataValidationError(f"{path}:{lineno}: {exc}") from None
            ys.append(vals[ti])
            xs.append([v for i, v in enumerate(vals) if i != ti])
    if not xs:
        raise DataValidationError(f"{path}: no data rows")
    return Dataset(np.array(xs), np.array(ys)), feature_names


def write_dataset_csv(path: str, data: Dataset) -> None:
    header = [f"x{j + 1}" for j in range(data.m)] + ["y"]
    rows = [list(map(float, data.X[i])) + [float(data.y[i])] for i in range(data.n)]
    write_csv(path, header, rows)


def _write_manifest(out: str, command: str, args_ns: argparse.Namespace, duration: float, outputs: list[str]) -> None:
    resolved = {k: v for k, v in sorted(vars(args_ns).items()) if k not in ("func",)}
    doc = {
        "command": command,
        "argv": _argv_from_args(command, resolved),
        "config": resolved,
        "seed": resolved.get("seed"),
        "version": __version__,
        "duration_s": duration,
        "outputs": outputs,
    }
    write_json(out + ".manifest.json", doc)


def _argv_from_args(command: str, resolved: dict) -> list[str]:
    argv = [command]
    for key, val in resolved.items():
        if val is None or key == "manifest":
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(val, bool):
            if val:
                argv.append(flag)
        else:
            argv.extend([flag, str(val)])
    return argv


def _budget_from(args) -> AttackBudget:
    p = math.inf if args.p == "inf" else 2.0
    return AttackBudget(delta=args.delta, p=p)


def _config_from(args) -> SolverConfig:
    return SolverConfig(max_iterations=args.max_iter, tolerance=args.tol, seed=args.seed)


def _zero_threshold(data: Dataset, kind: str, p: str) -> float:
    """Radius above which the fitted coefficients collapse to zero."""
    X, y = data.X, data.y
    if kind == "lasso":
        return (2.0 / data.n) * float(np.abs(X.T @ y).max())
    if kind == "sqrt_lasso":
        return float(np.abs(X.T @ y).max()) / max(1e-300, float(np.linalg.norm(y)))
    l1y = max(1e-300, float(np.abs(y).sum()))
    if p == "2":
        return float(np.linalg.norm(X.T @ y)) / l1y
    return float(np.abs(X.T @ y).max()) / l1y


# ---------------------------------------------------------------------------
# subcommands


def cmd_fit(args) -> int:
    t0 = time.perf_counter()
    data, _ = load_dataset_csv(args.data, args.target_col)
    kind = _METHOD_KINDS[args.method]
    config = _config_from(args)
    spec = solvers.EstimatorSpec(
        kind=kind,
        budget=_budget_from(args) if kind == "adversarial" else None,
        delta=args.delta,
        config=config,
    )
    res = solvers.fit(data, spec)
    ev = xp.metrics(res.beta, data)
    doc = {
        "method": args.method,
        "method_tag": res.method_tag,
        "p": args.p if kind == "adversarial" else None,
        "delta": args.delta,
        "n": data.n,
        "m": data.m,
        "coefficients": [fmt(v) for v in res.beta],
        "objective": fmt(res.objective),
        "iterations": res.iterations,
        "converged": bool(res.converged),
        "optimality_residual": fmt(res.optimality_residual),
        "train_mse": fmt(ev.train_mse),
        "l1_norm": fmt(ev.l1_norm),
        "l2_norm": fmt(ev.l2_norm),
        "nonzero_count": ev.nonzero_count,
    }
    write_json(args.out, doc)
    _write_manifest(args.out, "fit", args, time.perf_counter() - t0, [args.out])
    return EXIT_OK if res.converged else EXIT_NOT_CONVERGED


def cmd_path(args) -> int:
    t0 = time.perf_counter()
    data, _ = load_dataset_csv(args.data, args.target_col)
    kind = _METHOD_KINDS[args.method]
    grid_max = args.grid_max if args.grid_max is not None else 1.2 * _zero_threshold(data, kind, args.p)
    grid_min = args.grid_min if args.grid_min is not None else 1e-6 * grid_max
    grid = xp.log_delta_grid(grid_min, grid_max, args.grid_size)
    p = (math.inf if args.p == "inf" else 2.0) if kind == "adversarial" else None
    records = xp.regularization_path(data, kind, grid, _config_from(args), p=p)
    header = ["delta", "train_mse", "adv_objective", "l1_norm", "l2_norm", "nonzero_count"]
    header += [f"beta_{j + 1}" for j in range(data.m)]
    rows = []
    for rec in records:
        rows.append(
            [rec.delta, rec.train_mse, rec.train_adv_objective, rec.l1_norm, rec.l2_norm, rec.nonzero_count]
            + [float(v) for v in rec.beta]
        )
    write_csv(args.out, header, rows)
    _write_manifest(args.out, "path", args, time.perf_counter() - t0, [args.out])
    return EXIT_OK if all(rec.converged for rec in records) else EXIT_NOT_CONVERGED


def cmd_thresholds(args) -> int:
    t0 = time.perf_counter()
    data, _ = load_dataset_csv(args.data, args.target_col)
    report = th.interpolation_thresholds(data)
    doc = {
        "n": data.n,
        "m": data.m,
        "gamma_min_X": fmt(report.gamma_min_X),
        "gamma_min_XQt": fmt(report.gamma_min_XQt),
    }
    if args.with_basis:
        doc["Q"] = [[fmt(v) for v in row] for row in report.Q]
    write_json(args.out, doc)
    _write_manifest(args.out, "thresholds", args, time.perf_counter() - t0, [args.out])
    return EXIT_OK


def cmd_gen(args) -> int:
    t0 = time.perf_counter()
    seeds = RngSeed(args.seed).children(2)
    outputs = [args.out]
    if args.kind == "isotropic":
        spec = xp.IsotropicSpec(
            n=args.n, m=args.m, r2=args.r2, sigma2=args.sigma2,
            beta_star_seed=RngSeed(seeds[0]), noise_seed=RngSeed(seeds[1]),
        )
        data, beta_star = xp.generate_isotropic(spec)
        truth_doc = {"kind": "isotropic", "beta_star": [fmt(v) for v in beta_star]}
    else:
        spec = xp.LatentSpec(n=args.n, m=args.m, d=args.d, sigma_xi=args.sigma_xi, seed=RngSeed(seeds[0]))
        data, truth = xp.generate_latent(spec)
        truth_doc = {
            "kind": "latent",
            "theta": [fmt(v) for v in truth.theta],
            "W": [[fmt(v) for v in row] for row in truth.W],
        }
    write_dataset_csv(args.out, data)
    if args.truth_out:
        write_json(args.truth_out, truth_doc)
        outputs.append(args.truth_out)
    _write_manifest(args.out, "gen", args, time.perf_counter() - t0, outputs)
    return EXIT_OK


def cmd_sweep(args) -> int:
    t0 = time.perf_counter()
    m_grid = [int(v) for v in args.m_grid.split(",") if v.strip()]
    deltas = [float(v) for v in args.deltas.split(",") if v.strip()]
    estimators = [e.strip().replace("-", "_") for e in args.estimators.split(",") if e.strip()]
    if args.kind == "isotropic":
        base = xp.IsotropicSpec(n=args.n, m=max(m_grid), r2=args.r2, sigma2=args.sigma2)
    else:
        base = xp.LatentSpec(n=args.n, m=max(m_grid), d=args.d, sigma_xi=args.sigma_xi)
    records = xp.feature_sweep(
        base, m_grid, deltas, repetitions=args.reps, estimators=estimators,
        base_seed=args.seed, n_test=args.n_test, tolerance=args.tol, jobs=args.jobs,
    )
    header = ["m", "delta", "estimator", "stat", "train_mse", "test_mse", "l2_norm"]
    rows = []
    for rec in records:
        for si, stat in enumerate(("q25", "median", "q75")):
            rows.append([rec.m, rec.delta, rec.estimator, stat, rec.train_mse[si], rec.test_mse[si], rec.l2_norm[si]])
    write_csv(args.out, header, rows)
    _write_manifest(args.out, "sweep", args, time.perf_counter() - t0, [args.out])
    return EXIT_OK


def cmd_replay(args) -> int:
    with open(args.manifest, encoding="utf-8") as fh:
        doc = json.load(fh)
    return main(doc["argv"])


# ---------------------------------------------------------------------------
# parser


def _add_common(p, with_method=True):
    p.add_argument("--data", required=True, help="dataset CSV path")
    p.add_argument("--target-col", default="y", help="name of the response column")
    if with_method:
        p.add_argument("--method", required=True, choices=sorted(_METHOD_KINDS))
        p.add_argument("--p", choices=["2", "inf"], default="inf", help="attack norm for --method adv")
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--max-iter", type=int, default=200000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True, help="output file path")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="advlin", description=__doc__)
    ap.add_argument("--version", action="version", version=f"advlin {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit one estimator and write a JSON result")
    _add_common(p)
    p.add_argument("--delta", type=float, default=0.0, help="attack radius / regularization strength")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("path", help="regularization path over a log-spaced delta grid")
    _add_common(p)
    p.add_argument("--grid-min", type=float, default=None)
    p.add_argument("--grid-max", type=float, default=None)
    p.add_argument("--grid-size", type=int, default=xp.PATH_GRID_SIZE)
    p.set_defaults(func=cmd_path)

    p = sub.add_parser("thresholds", help="interpolation-threshold bounds of a dataset")
    p.add_argument("--data", required=True)
    p.add_argument("--target-col", default="y")
    p.add_argument("--with-basis", action="store_true", help="embed the orthonormal row basis")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_thresholds)

    p = sub.add_parser("gen", help="generate a synthetic dataset CSV")
    p.add_argument("--kind", choices=["isotropic", "latent"], default="isotropic")
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--r2", type=float, default=4.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--sigma-xi", type=float, default=0.1)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", required=True)
    p.add_argument("--truth-out", default=None, help="also write the ground truth as JSON")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("sweep", help="feature-count sweep with quantile summaries")
    p.add_argument("--kind", choices=["isotropic", "latent"], default="isotropic")
    p.add_argument("--n", type=int, default=100)
    p.add_argument("--r2", type=float, default=4.0)
    p.add_argument("--sigma2", type=float, default=1.0)
    p.add_argument("--d", type=int, default=20)
    p.add_argument("--sigma-xi", type=float, default=0.1)
    p.add_argument("--m-grid", required=True, help="comma-separated ascending feature counts")
    p.add_argument("--deltas", default="0.5,0.1,0.05,0.01")
    p.add_argument("--estimators", default="ridge,lasso,adv-inf,adv-l2")
    p.add_argument("--reps", type=int, default=10)
    p.add_argument("--n-test", type=int, default=100)
    p.add_argument("--tol", type=float, default=1e-8)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("replay", help="re-run a command from its manifest")
    p.add_argument("manifest", help="path to a .manifest.json file")
    p.set_defaults(func=cmd_replay)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataValidationError, RankDeficiencyError, FileNotFoundError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"advlin: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


def console_entry() -> None:
    sys.exit(main())


if __name__ == "__main__":
    console_entry()
