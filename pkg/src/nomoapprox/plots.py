"""Figure rendering for run reports.

PNG files are written next to the delimited output.  Rendering is
best-effort presentation; the CSV files remain the machine-readable
contract.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .anova import AnovaResult
from .pipeline import ErrorReport, MonotoneTable, NomoApprox

DPI = 150

__all__ = [
    "plot_inner",
    "plot_outer",
    "plot_error",
    "plot_variances",
    "plot_sweep",
]


def plot_inner(path: Path, na: NomoApprox, n: int = 1001) -> None:
    xs = np.linspace(0.0, 1.0, n)
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    for k, p in enumerate(na.inner, start=1):
        ax.plot(xs, p(xs), label=rf"$\varphi_{{{k}}}$")
    ax.set_xlabel(r"$x_k$")
    ax.set_ylabel(r"$\varphi_k(x_k)$")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_outer(path: Path, table: MonotoneTable) -> None:
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(table.ys, table.xs)
    ax.set_xlabel(r"$y$")
    ax.set_ylabel(r"$\psi(y)$")
    ax.grid(alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_error(path: Path, report: ErrorReport) -> None:
    """Error heatmap for two variables, a curve for one; other
    dimensions are not rendered."""
    K = len(report.axes)
    if K == 1:
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        ax.plot(report.axes[0], report.err_grid)
        ax.set_xlabel(r"$x_1$")
        ax.set_ylabel("error")
        ax.grid(alpha=0.3)
    elif K == 2:
        fig, ax = plt.subplots(figsize=(5.0, 4.0))
        extent = (0.0, 1.0, 0.0, 1.0)
        im = ax.imshow(
            report.err_grid.T,
            origin="lower",
            extent=extent,
            aspect="auto",
            cmap="RdBu_r",
        )
        fig.colorbar(im, ax=ax, label="error")
        ax.set_xlabel(r"$x_1$")
        ax.set_ylabel(r"$x_2$")
    else:
        return
    ax.set_title(f"sup error {report.sup_err:.2e}")
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_variances(path: Path, result: AnovaResult) -> None:
    subsets = sorted(result.variances, key=lambda s: (len(s), s))
    labels = ["{" + ",".join(str(k) for k in s) + "}" for s in subsets]
    values = [result.variances[s] for s in subsets]
    fig, ax = plt.subplots(figsize=(max(5.0, 0.5 * len(labels)), 3.4))
    ax.bar(range(len(values)), values)
    ax.axhline(result.total_variance, color="k", ls="--", lw=1, label="total variance")
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=45 if len(labels) > 8 else 0)
    ax.set_ylabel("component variance")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)


def plot_sweep(path: Path, rows: list[dict]) -> None:
    degrees = [r["degree"] for r in rows]
    fig, ax = plt.subplots(figsize=(5.0, 3.4))
    ax.plot(degrees, [r["sdr_objective"] for r in rows], "o-", label="relaxation value")
    ax.plot(degrees, [r["feasible_ratio"] for r in rows], "s-", label="feasible ratio")
    ax.set_xlabel("skew degree")
    ax.set_ylabel(r"$1-\varepsilon$")
    ax.grid(alpha=0.3)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, dpi=DPI)
    plt.close(fig)
