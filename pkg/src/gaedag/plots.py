"""Benchmark summary figures: SHD, TPR, and training time against graph size."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

_METRIC_LABELS = {
    "shd": ("shd_mean", "shd_std", "SHD"),
    "tpr": ("tpr_mean", "tpr_std", "TPR"),
    "wall_time": ("wall_time_mean", "wall_time_std", "training time (s)"),
}


def plot_metric_vs_d(summary_rows: list[dict], metric: str, out_path) -> Path:
    """One errorbar curve per method, x = graph size d."""
    mean_col, std_col, label = _METRIC_LABELS[metric]
    fig, ax = plt.subplots(figsize=(5, 3.4))
    methods = sorted({row["method"] for row in summary_rows})
    for method in methods:
        rows = sorted((r for r in summary_rows if r["method"] == method), key=lambda r: r["d"])
        ds = [r["d"] for r in rows]
        means = [r[mean_col] for r in rows]
        stds = [r[std_col] for r in rows]
        ax.errorbar(ds, means, yerr=stds, marker="o", capsize=3, label=method)
    ax.set_xlabel("number of variables d")
    ax.set_ylabel(label)
    if metric == "tpr":
        ax.set_ylim(-0.02, 1.02)
    ax.legend()
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    out_path = Path(out_path)
    out_path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
    return out_path


def render_summary_figures(summary_rows: list[dict], out_dir) -> list[Path]:
    out_dir = Path(out_dir)
    return [
        plot_metric_vs_d(summary_rows, "shd", out_dir / "shd_vs_d.png"),
        plot_metric_vs_d(summary_rows, "tpr", out_dir / "tpr_vs_d.png"),
        plot_metric_vs_d(summary_rows, "wall_time", out_dir / "wall_time_vs_d.png"),
    ]
