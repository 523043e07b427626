"""Command-line front end.

Reads a polynomial from JSON, runs the approximation pipeline (or just
the variance decomposition, or a degree sweep) and writes a report
directory: ``report.json`` plus CSV tables and PNG figures.

Exit codes: 0 on success (and, for pipeline runs, epsilon within the
requested target), 2 when the pipeline ran but missed the epsilon
target, 1 on any error (bad input, range violation, infeasibility).
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

from . import __version__
from .anova import anova_decompose
from .errors import NomoError
from .pipeline import approximate, error_report
from .polynomial import MultiPoly
from .report import (
    write_error_csv,
    write_matrix_csv,
    write_phi_csv,
    write_psi_csv,
    write_report_json,
    write_sweep_csv,
    write_variances_csv,
)

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_TARGET_MISSED = 2

MAX_DEGREE = 32
MAX_GRID = 2049


class _Parser(argparse.ArgumentParser):
    # usage errors exit 1; code 2 is reserved for "ran but missed target"
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_ERROR, f"{self.prog}: error: {message}\n")


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(
        prog="nomoapprox",
        description=(
            "Approximate a multivariate polynomial on the unit cube by a "
            "monotone outer function composed with a sum of univariate "
            "inner functions."
        ),
    )
    p.add_argument("--input", required=True, help="polynomial JSON file")
    p.add_argument("--degree", type=int, default=None, help="skew degree D (1..32)")
    p.add_argument(
        "--epsilon",
        type=float,
        default=1e-2,
        help="target variance defect 1-ratio (default 1e-2)",
    )
    p.add_argument(
        "--grid",
        type=int,
        default=101,
        help="points per axis for the error grid (default 101)",
    )
    p.add_argument("--out", default="out", help="output directory (default ./out)")
    p.add_argument(
        "--anova-only",
        action="store_true",
        help="only decompose the input; write variances.csv and stop",
    )
    p.add_argument(
        "--max-order",
        type=int,
        default=None,
        help="interaction order for --anova-only (default min(K, 2))",
    )
    p.add_argument(
        "--sweep",
        default=None,
        help="comma-separated degree list, e.g. 5,10,15,20",
    )
    p.add_argument(
        "--distribute-mean",
        action="store_true",
        help="fold the constant part into the inner functions (mean/K each)",
    )
    p.add_argument(
        "--deterministic",
        action="store_true",
        help="omit timings from report.json so outputs are byte-identical",
    )
    p.add_argument("--dump-cone", action="store_true", help="write the cone matrices as CSV")
    p.add_argument("--dump-forms", action="store_true", help="write the moment matrices as CSV")
    p.add_argument(
        "--dump-sdp",
        action="store_true",
        help="write the (equilibrated) relaxation data as JSON",
    )
    p.add_argument("--no-plots", action="store_true", help="skip PNG figure rendering")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    return p


def _load_poly(path: str) -> MultiPoly:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    return MultiPoly.from_dict(data)


def _validate(args, parser) -> None:
    if args.degree is not None and not 1 <= args.degree <= MAX_DEGREE:
        parser.error(f"--degree must be in 1..{MAX_DEGREE}")
    if not 2 <= args.grid <= MAX_GRID:
        parser.error(f"--grid must be in 2..{MAX_GRID}")
    if not 0.0 < args.epsilon < 1.0:
        parser.error("--epsilon must be in (0, 1)")
    if args.sweep is None and not args.anova_only and args.degree is None:
        parser.error("--degree is required unless --anova-only or --sweep is given")


def _parse_sweep(text: str, parser) -> list[int]:
    try:
        degrees = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        parser.error("--sweep expects a comma-separated list of integers")
    if not degrees or not all(1 <= d <= MAX_DEGREE for d in degrees):
        parser.error(f"--sweep degrees must be in 1..{MAX_DEGREE}")
    return degrees


def _dump_cone(outdir: Path, cone) -> None:
    write_matrix_csv(outdir / "cone_m_tilde.csv", cone.m_tilde)
    write_matrix_csv(outdir / "cone_m.csv", cone.m)


def _dump_forms(outdir: Path, qf) -> None:
    write_matrix_csv(outdir / "forms_b1.csv", qf.b1)
    write_matrix_csv(outdir / "forms_b2.csv", qf.b2)
    write_matrix_csv(outdir / "forms_b.csv", qf.b_mat)
    write_matrix_csv(outdir / "forms_a.csv", qf.a_sum)
    for k, mat in enumerate(qf.a_k, start=1):
        write_matrix_csv(outdir / f"forms_a_{k}.csv", mat)


def _dump_sdp(outdir: Path, na) -> None:
    from .quadforms import equilibrate

    eq = equilibrate(na.forms, na.cone)
    payload = {
        "a": eq.a_hat.tolist(),
        "b": eq.b_hat.tolist(),
        "m": eq.m_hat.tolist(),
        "delta": 1.0,
        "scale": eq.scale.tolist(),
        "note": "equilibrated problem as handed to the solver; "
        "original-coordinate skew z = scale * z_hat",
    }
    write_report_json(outdir / "sdp_problem.json", payload)


def _run_anova_only(f: MultiPoly, args, outdir: Path) -> int:
    max_order = args.max_order if args.max_order is not None else min(f.num_vars, 2)
    t0 = time.perf_counter()
    result = anova_decompose(f, max_order)
    elapsed = time.perf_counter() - t0
    write_variances_csv(outdir / "variances.csv", result)
    payload = {
        "mode": "anova-only",
        "input_num_vars": f.num_vars,
        "max_order": max_order,
        "anova": result.to_dict(),
    }
    if not args.deterministic:
        payload["timings"] = {"anova_s": elapsed}
    write_report_json(outdir / "report.json", payload)
    if not args.no_plots:
        from .plots import plot_variances

        plot_variances(outdir / "variances.png", result)
    return EXIT_OK


def _run_pipeline(f: MultiPoly, args, outdir: Path) -> int:
    na = approximate(f, args.degree)
    if args.distribute_mean:
        na = na.distribute_mean()
    err = error_report(na, f, args.grid)

    write_variances_csv(outdir / "variances.csv", na.composition_anova)
    write_phi_csv(outdir / "phi_k.csv", na.inner)
    write_psi_csv(outdir / "psi.csv", na.outer)
    write_error_csv(outdir / "error.csv", err)
    payload = na.to_dict(include_timings=not args.deterministic)
    payload.update(
        {
            "mode": "approximate",
            "degree": args.degree,
            "epsilon_target": args.epsilon,
            "sup_error": err.sup_err,
            "rms_error": err.rms_err,
            "error_grid_n": args.grid,
        }
    )
    write_report_json(outdir / "report.json", payload)

    if args.dump_cone:
        _dump_cone(outdir, na.cone)
    if args.dump_forms:
        _dump_forms(outdir, na.forms)
    if args.dump_sdp:
        _dump_sdp(outdir, na)
    if not args.no_plots:
        from .plots import plot_error, plot_inner, plot_outer, plot_variances

        plot_inner(outdir / "phi_k.png", na)
        plot_outer(outdir / "psi.png", na.outer)
        plot_error(outdir / "error.png", err)
        plot_variances(outdir / "variances.png", na.composition_anova)

    return EXIT_OK if na.epsilon <= args.epsilon else EXIT_TARGET_MISSED


def _run_sweep(f: MultiPoly, args, outdir: Path, degrees: list[int]) -> int:
    rows = []
    for d in degrees:
        na = approximate(f, d)
        err = error_report(na, f, args.grid)
        rows.append(
            {
                "degree": d,
                "sdr_objective": na.sdr_objective,
                "feasible_ratio": na.ratio,
                "sup_error": err.sup_err,
                "epsilon": na.epsilon,
            }
        )
    write_sweep_csv(outdir / "sweep.csv", rows)
    payload = {
        "mode": "sweep",
        "degrees": degrees,
        "rows": rows,
        "epsilon_target": args.epsilon,
    }
    write_report_json(outdir / "report.json", payload)
    if not args.no_plots:
        from .plots import plot_sweep

        plot_sweep(outdir / "sweep.png", rows)
    best_eps = min(r["epsilon"] for r in rows)
    return EXIT_OK if best_eps <= args.epsilon else EXIT_TARGET_MISSED


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        _validate(args, parser)
        degrees = _parse_sweep(args.sweep, parser) if args.sweep else None
    except SystemExit as exc:
        return int(exc.code or 0)

    try:
        f = _load_poly(args.input)
    except OSError as exc:
        print(f"nomoapprox: cannot read input: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except (json.JSONDecodeError, ValueError) as exc:
        print(f"nomoapprox: malformed polynomial JSON: {exc}", file=sys.stderr)
        return EXIT_ERROR

    outdir = Path(args.out)
    outdir.mkdir(parents=True, exist_ok=True)

    try:
        if args.anova_only:
            return _run_anova_only(f, args, outdir)
        if degrees is not None:
            return _run_sweep(f, args, outdir, degrees)
        return _run_pipeline(f, args, outdir)
    except NomoError as exc:
        print(f"nomoapprox: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except ValueError as exc:
        print(f"nomoapprox: invalid configuration: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
