"""Text file formats: numeric grids, datasets with sidecar metadata, reports, metric rows.

Floats are written with 17 significant digits so every file round-trips
bit-exactly. Writes go through a temp-file-then-rename step to stay atomic.
"""

from __future__ import annotations

import csv
import json
import os
from pathlib import Path

import numpy as np

from .synth import Dataset

METRICS_COLUMNS = [
    "method", "sem_kind", "d", "l", "seed",
    "shd", "tpr", "extra", "missing", "reversed",
    "wall_time_seconds", "repairs",
]


class ParseError(ValueError):
    """Parse failure with file position attached."""

    def __init__(self, path, line: int, column: int, message: str):
        super().__init__(f"{path}:{line}:{column}: {message}")
        self.path = str(path)
        self.line = line
        self.column = column


def format_float(x: float) -> str:
    return f"{x:.17g}"


def atomic_write_text(path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def save_matrix(path, M) -> None:
    """Dense numeric grid, one comma-delimited row per matrix row."""
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise ValueError(f"expected a 2-d matrix, got shape {M.shape}")
    lines = [",".join(format_float(x) for x in row) for row in M]
    atomic_write_text(path, "\n".join(lines) + "\n")


def load_matrix(path) -> np.ndarray:
    path = Path(path)
    rows: list[list[float]] = []
    width = None
    with open(path) as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            fields = line.split(",")
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise ParseError(path, line_no, 1, f"expected {width} columns, found {len(fields)}")
            row = []
            for col_no, tok in enumerate(fields, start=1):
                try:
                    row.append(float(tok))
                except ValueError:
                    raise ParseError(path, line_no, col_no, f"not a number: {tok!r}") from None
            rows.append(row)
    if not rows:
        raise ParseError(path, 1, 1, "empty matrix file")
    return np.array(rows, dtype=np.float64)


def meta_path_for(data_path) -> Path:
    data_path = Path(data_path)
    return data_path.with_name(data_path.stem + ".meta.json")


def save_json(path, obj) -> None:
    atomic_write_text(path, json.dumps(obj, indent=2, sort_keys=True) + "\n")


def load_json(path) -> dict:
    with open(path) as fh:
        return json.load(fh)


def save_dataset(path, ds: Dataset) -> tuple[Path, Path]:
    """Write the (n, d*l) sample matrix plus a sidecar with dims, seed, kind, truth."""
    path = Path(path)
    n, d, l = ds.X.shape
    save_matrix(path, ds.X.reshape(n, d * l))  # columns grouped by variable, then dimension
    meta = {
        "n": n,
        "d": d,
        "l": l,
        "seed": ds.seed,
        "sem_kind": ds.kind,
        "noise_scale": ds.noise_scale,
        "truth": ds.truth.tolist(),
        "provenance": ds.provenance,
    }
    meta_path = meta_path_for(path)
    save_json(meta_path, meta)
    return path, meta_path


def load_dataset(path) -> Dataset:
    path = Path(path)
    flat = load_matrix(path)
    meta = load_json(meta_path_for(path))
    n, d, l = meta["n"], meta["d"], meta["l"]
    if flat.shape != (n, d * l):
        raise ParseError(path, 1, 1, f"data shape {flat.shape} does not match sidecar (n={n}, d={d}, l={l})")
    truth = np.asarray(meta["truth"], dtype=np.float64)
    return Dataset(flat.reshape(n, d, l), truth, meta["sem_kind"], meta["seed"],
                   meta.get("noise_scale", 1.0), meta.get("provenance", {}))


def load_adjacency(path) -> np.ndarray:
    """Weighted adjacency from a grid file, or from a dataset sidecar's truth field."""
    path = Path(path)
    if path.suffix == ".json":
        meta = load_json(path)
        if "truth" not in meta:
            raise ParseError(path, 1, 1, "JSON file has no 'truth' adjacency")
        return np.asarray(meta["truth"], dtype=np.float64)
    M = load_matrix(path)
    if M.shape[0] != M.shape[1]:
        raise ParseError(path, 1, 1, f"adjacency must be square, got {M.shape}")
    return M


def metrics_row(method: str, sem_kind: str, d: int, l: int, seed: int,
                gm, repairs: int) -> dict:
    return {
        "method": method,
        "sem_kind": sem_kind,
        "d": d,
        "l": l,
        "seed": seed,
        "shd": gm.shd,
        "tpr": gm.tpr,
        "extra": gm.extra,
        "missing": gm.missing,
        "reversed": gm.reversed,
        "wall_time_seconds": gm.wall_time_seconds,
        "repairs": repairs,
    }


def format_metrics_row(row: dict) -> str:
    out = []
    for col in METRICS_COLUMNS:
        val = row[col]
        out.append(format_float(val) if isinstance(val, float) else str(val))
    return ",".join(out)


def write_metrics_csv(path, rows: list[dict]) -> None:
    lines = [",".join(METRICS_COLUMNS)] + [format_metrics_row(r) for r in rows]
    atomic_write_text(path, "\n".join(lines) + "\n")


def read_metrics_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        rows = []
        for raw in reader:
            row = dict(raw)
            for col in ("d", "l", "seed", "shd", "extra", "missing", "reversed", "repairs"):
                row[col] = int(row[col])
            for col in ("tpr", "wall_time_seconds"):
                row[col] = float(row[col])
            rows.append(row)
    return rows
