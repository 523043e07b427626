"""Delimited and JSON output for run artifacts.

All numeric fields are written with 17 significant digits, '.' decimal
separator and LF line endings, so re-running an identical configuration
reproduces the files byte for byte.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

import numpy as np

from .anova import AnovaResult
from .pipeline import ErrorReport, MonotoneTable
from .polynomial import UniPoly

__all__ = [
    "fmt",
    "write_csv",
    "write_variances_csv",
    "write_phi_csv",
    "write_psi_csv",
    "write_error_csv",
    "write_sweep_csv",
    "write_matrix_csv",
    "write_report_json",
    "variance_table",
]

PHI_SAMPLES = 1001


def fmt(x: float) -> str:
    return f"{float(x):.17g}"


def write_csv(path: Path, header: list[str], rows) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(",".join(header) + "\n")
        for row in rows:
            fh.write(",".join(fmt(v) if not isinstance(v, str) else v for v in row) + "\n")


def _subset_label(subset: tuple[int, ...]) -> str:
    return "sigma2_" + "_".join(str(k) for k in subset)


def variance_table(result: AnovaResult) -> tuple[list[str], list[float]]:
    """Header and single value row: per-subset variances (ascending
    subset size, lexicographic within), total variance, first-order
    ratio and epsilon = 1 - ratio."""
    subsets = sorted(result.variances, key=lambda s: (len(s), s))
    header = [_subset_label(s) for s in subsets]
    values = [result.variances[s] for s in subsets]
    total = result.total_variance
    if total > 0.0:
        ratio = result.variance_up_to(1) / total
    else:
        ratio = math.nan
    header += ["sigma2_total", "ratio", "epsilon"]
    values += [total, ratio, 1.0 - ratio]
    return header, values


def write_variances_csv(path: Path, result: AnovaResult) -> None:
    header, values = variance_table(result)
    write_csv(path, header, [values])


def write_phi_csv(path: Path, inner: tuple[UniPoly, ...], n: int = PHI_SAMPLES) -> None:
    xs = np.linspace(0.0, 1.0, n)
    cols = [p(xs) for p in inner]
    header = ["x"] + [f"phi_{k}" for k in range(1, len(inner) + 1)]
    rows = ([x, *[c[i] for c in cols]] for i, x in enumerate(xs))
    write_csv(path, header, rows)


def write_psi_csv(path: Path, table: MonotoneTable) -> None:
    rows = ([y, x] for x, y in zip(table.xs, table.ys))
    write_csv(path, ["y", "psi"], rows)


def write_error_csv(path: Path, report: ErrorReport) -> None:
    K = len(report.axes)
    header = [f"x{k}" for k in range(1, K + 1)] + ["f", "approx", "error"]

    def rows():
        for idx in np.ndindex(report.err_grid.shape):
            coords = [report.axes[k][idx[k]] for k in range(K)]
            yield [
                *coords,
                report.f_grid[idx],
                report.approx_grid[idx],
                report.err_grid[idx],
            ]

    write_csv(path, header, rows())


def write_sweep_csv(path: Path, rows: list[dict]) -> None:
    header = ["degree", "sdr_objective", "feasible_ratio", "sup_error"]
    write_csv(
        path,
        header,
        (
            [str(r["degree"]), r["sdr_objective"], r["feasible_ratio"], r["sup_error"]]
            for r in rows
        ),
    )


def write_matrix_csv(path: Path, mat: np.ndarray) -> None:
    mat = np.atleast_2d(np.asarray(mat, dtype=float))
    write_csv(path, [f"c{j}" for j in range(1, mat.shape[1] + 1)], mat.tolist())


def write_report_json(path: Path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
