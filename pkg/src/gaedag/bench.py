"""Benchmark sweeps: generate -> train -> evaluate per (method, d, seed), resumable.

Each run lives in its own directory keyed by a content hash of its fully
resolved configuration; reruns skip directories that already hold a metrics
file, so an interrupted sweep completes only the missing runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from . import io, metrics, synth
from .model import ArchConfig
from .optimizer import TrainConfig, train

DEFAULTS = {
    "methods": ["gae", "linear"],
    "d_list": [10],
    "seeds": [0, 1, 2, 3],
    "sem_kind": "gim",
    "l": 1,
    "n": 3000,
    "expected_degree": 3.0,
    "weight_low": 0.5,
    "weight_high": 2.0,
    "threshold": 0.3,
    "lam": 0.01,
    "lr": 1e-3,
    "inner_steps": 1000,
    "max_outer": 20,
    "beta": 10.0,
    "gamma": 0.25,
    "h_tol": 1e-8,
    "rho_max": 1e16,
    "inner_patience": 100,
    "inner_rel_tol": 1e-8,
    "mlp_l2": 5e-3,
    "hidden": 16,
    "layers": 3,
    "l_latent": None,
    "zero_diag": True,
    "workers": 1,
    "plots": False,
}

SUMMARY_COLUMNS = [
    "method", "sem_kind", "d", "l", "n_runs",
    "shd_mean", "shd_std", "tpr_mean", "tpr_std",
    "wall_time_mean", "wall_time_std",
]


def resolve_config(overrides: dict) -> dict:
    """Materialize every field; unknown keys are rejected up front."""
    unknown = set(overrides) - set(DEFAULTS)
    if unknown:
        raise ValueError(f"unknown config fields: {sorted(unknown)}")
    cfg = dict(DEFAULTS)
    cfg.update({k: v for k, v in overrides.items() if v is not None})
    return cfg


def derived_seed(seed: int, stream: int) -> int:
    """Expand the per-run root seed into independent streams (graph/data/init)."""
    return int(np.random.SeedSequence([seed, stream]).generate_state(1)[0])


def run_config(sweep: dict, method: str, d: int, seed: int) -> dict:
    l_latent = sweep["l_latent"]
    if method in ("linear", "gae-additive"):
        l_latent = sweep["l"]
    elif l_latent is None:
        l_latent = 1
    return {
        "method": method,
        "sem_kind": sweep["sem_kind"],
        "d": d,
        "l": sweep["l"],
        "l_latent": l_latent,
        "n": sweep["n"],
        "seed": seed,
        "graph_seed": derived_seed(seed, 0),
        "data_seed": derived_seed(seed, 1),
        "init_seed": derived_seed(seed, 2),
        "expected_degree": sweep["expected_degree"],
        "weight_low": sweep["weight_low"],
        "weight_high": sweep["weight_high"],
        "threshold": sweep["threshold"],
        "lam": sweep["lam"],
        "lr": sweep["lr"],
        "inner_steps": sweep["inner_steps"],
        "max_outer": sweep["max_outer"],
        "beta": sweep["beta"],
        "gamma": sweep["gamma"],
        "h_tol": sweep["h_tol"],
        "rho_max": sweep["rho_max"],
        "inner_patience": sweep["inner_patience"],
        "inner_rel_tol": sweep["inner_rel_tol"],
        "mlp_l2": sweep["mlp_l2"],
        "hidden": sweep["hidden"],
        "layers": sweep["layers"],
        "zero_diag": sweep["zero_diag"],
    }


def config_hash(cfg: dict) -> str:
    blob = json.dumps(cfg, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:8]


def run_dir_name(cfg: dict) -> str:
    return f"{cfg['method']}_{cfg['sem_kind']}_d{cfg['d']}_seed{cfg['seed']}_{config_hash(cfg)}"


def make_dataset(cfg: dict) -> synth.Dataset:
    graph = synth.GraphSpec(cfg["d"], cfg["expected_degree"], cfg["weight_low"],
                            cfg["weight_high"], cfg["graph_seed"])
    sem = synth.SemSpec(cfg["sem_kind"], cfg["l"])
    ds = synth.generate(graph, sem, cfg["n"], cfg["data_seed"])
    ds.provenance["root_seed"] = cfg["seed"]
    return ds


def execute_run(cfg: dict, run_dir) -> dict:
    """One generate/train/eval cycle; writes all artifacts and the metrics row."""
    run_dir = Path(run_dir)
    run_dir.mkdir(parents=True, exist_ok=True)
    io.save_json(run_dir / "config.json", cfg)

    ds = make_dataset(cfg)
    io.save_dataset(run_dir / "dataset.csv", ds)

    train_cfg = TrainConfig(
        lam=cfg["lam"], lr=cfg["lr"], inner_steps=cfg["inner_steps"], max_outer=cfg["max_outer"],
        beta=cfg["beta"], gamma=cfg["gamma"], h_tol=cfg["h_tol"], rho_max=cfg["rho_max"],
        inner_patience=cfg["inner_patience"], inner_rel_tol=cfg["inner_rel_tol"],
        mlp_l2=cfg["mlp_l2"], seed=cfg["init_seed"],
    )
    arch = ArchConfig(method=cfg["method"], l_latent=cfg["l_latent"], hidden=cfg["hidden"],
                      layers=cfg["layers"], zero_diag=cfg["zero_diag"])
    params, report = train(ds.X, train_cfg, arch)

    pred = metrics.threshold(params.A, cfg["threshold"])
    gm = metrics.shd(pred, ds.truth)
    gm.wall_time_seconds = report.wall_time_seconds

    io.save_matrix(run_dir / "adjacency.csv", params.A)
    io.save_matrix(run_dir / "graph.csv", pred.edges.astype(np.float64))
    io.save_json(run_dir / "report.json", report.to_dict())
    row = io.metrics_row(cfg["method"], cfg["sem_kind"], cfg["d"], cfg["l"], cfg["seed"], gm, pred.repairs)
    io.save_json(run_dir / "metrics.json", row)
    return row


def _worker(args) -> dict:
    cfg, run_dir, blas_threads = args
    try:
        from threadpoolctl import threadpool_limits
        with threadpool_limits(limits=blas_threads):
            return execute_run(cfg, run_dir)
    except ImportError:
        return execute_run(cfg, run_dir)


def aggregate_rows(rows: list[dict]) -> list[dict]:
    """Mean/std per (method, sem_kind, d) cell, ordered by method then d."""
    cells: dict[tuple, list[dict]] = {}
    for row in rows:
        cells.setdefault((row["method"], row["sem_kind"], row["d"], row["l"]), []).append(row)
    out = []
    for (method, kind, d, l), cell in sorted(cells.items()):
        gms = [metrics.GraphMetrics(r["shd"], r["tpr"], r["extra"], r["missing"],
                                    r["reversed"], r["wall_time_seconds"]) for r in cell]
        s = metrics.aggregate(gms)
        out.append({
            "method": method, "sem_kind": kind, "d": d, "l": l, "n_runs": s.n_runs,
            "shd_mean": s.shd_mean, "shd_std": s.shd_std,
            "tpr_mean": s.tpr_mean, "tpr_std": s.tpr_std,
            "wall_time_mean": s.wall_time_mean, "wall_time_std": s.wall_time_std,
        })
    return out


def write_summary_csv(path, summary_rows: list[dict]) -> None:
    lines = [",".join(SUMMARY_COLUMNS)]
    for row in summary_rows:
        cells = [io.format_float(row[c]) if isinstance(row[c], float) else str(row[c])
                 for c in SUMMARY_COLUMNS]
        lines.append(",".join(cells))
    io.atomic_write_text(path, "\n".join(lines) + "\n")


def read_summary_csv(path) -> list[dict]:
    import csv

    with open(path, newline="") as fh:
        rows = []
        for raw in csv.DictReader(fh):
            row = dict(raw)
            for col in ("d", "l", "n_runs"):
                row[col] = int(row[col])
            for col in ("shd_mean", "shd_std", "tpr_mean", "tpr_std", "wall_time_mean", "wall_time_std"):
                row[col] = float(row[col])
            rows.append(row)
    return rows


def run_sweep(overrides: dict, out_dir, progress=None) -> tuple[list[dict], list[dict], list[dict]]:
    """Full benchmark sweep; returns (rows, summary, failures).

    Completed runs (metrics.json on disk) are reloaded instead of re-executed.
    Failures are recorded per run and do not stop the sweep.
    """
    sweep = resolve_config(overrides)
    out_dir = Path(out_dir)
    runs_root = out_dir / "runs"
    runs_root.mkdir(parents=True, exist_ok=True)
    io.save_json(out_dir / "sweep_config.json", sweep)

    pending = []
    rows = []
    failures = []
    for method in sweep["methods"]:
        for d in sweep["d_list"]:
            for seed in sweep["seeds"]:
                cfg = run_config(sweep, method, d, seed)
                run_dir = runs_root / run_dir_name(cfg)
                marker = run_dir / "metrics.json"
                if marker.exists():
                    rows.append(io.load_json(marker))
                    if progress:
                        progress(f"skip (done): {run_dir.name}")
                else:
                    pending.append((cfg, run_dir))

    workers = max(1, int(sweep["workers"]))
    blas_threads = max(1, (os.cpu_count() or 1) // workers) if workers > 1 else None
    if workers == 1 or len(pending) <= 1:
        for cfg, run_dir in pending:
            if progress:
                progress(f"run: {run_dir.name}")
            try:
                rows.append(execute_run(cfg, run_dir))
            except Exception as err:  # noqa: BLE001 - record per-run failure, keep sweeping
                failures.append(_record_failure(cfg, run_dir, err))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = {}
            for cfg, run_dir in pending:
                if progress:
                    progress(f"run: {run_dir.name}")
                futures[pool.submit(_worker, (cfg, str(run_dir), blas_threads))] = (cfg, run_dir)
            for future, (cfg, run_dir) in futures.items():
                err = future.exception()
                if err is None:
                    rows.append(future.result())
                else:
                    failures.append(_record_failure(cfg, run_dir, err))

    rows.sort(key=lambda r: (r["method"], r["sem_kind"], r["d"], r["seed"]))
    io.write_metrics_csv(out_dir / "runs.csv", rows)
    summary = aggregate_rows(rows)
    write_summary_csv(out_dir / "summary.csv", summary)

    if sweep["plots"] and summary:
        from . import plots

        plots.render_summary_figures(summary, out_dir / "figures")
    return rows, summary, failures


def _record_failure(cfg: dict, run_dir: Path, err: Exception) -> dict:
    record = {
        "run": Path(run_dir).name,
        "error": f"{type(err).__name__}: {err}",
        "traceback": "".join(traceback.format_exception(err)),
    }
    try:
        Path(run_dir).mkdir(parents=True, exist_ok=True)
        io.save_json(Path(run_dir) / "error.json", record)
    except OSError:
        pass
    return record
