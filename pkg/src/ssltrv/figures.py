"""Matplotlib rendering of the goodness-of-fit report figures."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .bladder import Dataset
from .gof import SummaryPlotData, ecdf, qq_points
from .gumbel import ModelParams, baseline_cdf

__all__ = ["render_gof_figures"]


def _fig_ecdf(d: Dataset, p: ModelParams, path: Path) -> None:
    xs, fn = ecdf(d)
    grid = np.linspace(xs[0] * 0.5, xs[-1] * 1.05, 400)
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.step(np.concatenate([[xs[0]], xs]), np.concatenate([[0.0], fn]), where="post", label="ECDF")
    ax.plot(grid, baseline_cdf(p, grid), "r-", label="fitted CDF")
    ax.set_xlabel("time")
    ax.set_ylabel("CDF")
    ax.legend(loc="lower right")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fig_qq(d: Dataset, p: ModelParams, path: Path) -> None:
    theo, emp = qq_points(d, p)
    fig, ax = plt.subplots(figsize=(4.8, 4.8))
    ax.plot(theo, emp, "o", ms=3, alpha=0.7)
    lim = [0.0, max(float(theo[-1]), float(emp[-1])) * 1.05]
    ax.plot(lim, lim, "r--", lw=1)
    ax.set_xlabel("model quantiles")
    ax.set_ylabel("ordered data")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fig_hist(summary: SummaryPlotData, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    widths = np.diff(summary.hist_edges)
    ax.bar(summary.hist_edges[:-1], summary.hist_density, width=widths, align="edge",
           alpha=0.55, edgecolor="k", linewidth=0.4, label="data")
    ax.plot(summary.density_grid, summary.density_values, "r-", lw=1.5, label="fitted density")
    ax.set_xlabel("time")
    ax.set_ylabel("density")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def _fig_box(d: Dataset, path: Path) -> None:
    fig, ax = plt.subplots(figsize=(3.6, 4.4))
    ax.boxplot(d.values, vert=True, widths=0.5)
    ax.set_ylabel("time")
    ax.set_xticks([])
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def render_gof_figures(d: Dataset, p: ModelParams, summary: SummaryPlotData, out_dir) -> list[str]:
    """Write the four report figures into out_dir; returns the filenames."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = {
        "ecdf_cdf.png": lambda path: _fig_ecdf(d, p, path),
        "qq_plot.png": lambda path: _fig_qq(d, p, path),
        "hist_density.png": lambda path: _fig_hist(summary, path),
        "box_plot.png": lambda path: _fig_box(d, path),
    }
    for name, draw in files.items():
        draw(out / name)
    return sorted(files)
