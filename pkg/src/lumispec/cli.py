"""Command-line entry point: simulate, analyze, report, export-svg.

Exit codes: 0 on success, 1 on a domain error (bad data, refused
overwrite, port fault), 2 on a usage error (unknown or inconsistent
flags). ``--seed`` falls back to the ``LUMISPEC_SEED`` environment
variable, then to 0.
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import dataio
from .charts import render_line_chart
from .engine import (
    AcquisitionPort,
    SimulatedPort,
    SweepPlan,
    SweepRecord,
    run_triplicate,
)
from .errors import DataIoError, LayoutError, LumispecError, MalformedHeaderError
from .geometry import FlatSurface, PivotGeometry, SphereSurface, SurfaceModel
from .optics import AngularResponse, OpticalConfig
from .spectral import (
    PipelineConfig,
    auc_profile,
    normalize_above_cutoff,
    profile_stats,
    run_pipeline,
    smooth_window2,
)

SEED_ENV_VAR = "LUMISPEC_SEED"
PROFILE_HEADER = "angle_deg,auc_norm_mean,auc_norm_std,n_trials"
PROFILE_FILE = "profile.csv"


# --- profile.csv ------------------------------------------------------------

def write_profile(
    path,
    angles_deg: np.ndarray,
    mean: np.ndarray,
    std: np.ndarray,
    n_trials: int,
) -> None:
    lines = [PROFILE_HEADER]
    for a, m, s in zip(angles_deg, mean, std):
        lines.append("%.6f,%.9f,%.9f,%d" % (a, m, s, n_trials))
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(lines) + "\n")
    except OSError as exc:
        raise DataIoError(f"cannot write profile {path}: {exc}") from exc


def read_profile(path) -> tuple[np.ndarray, np.ndarray, np.ndarray, int]:
    """Parse profile.csv into (angles, mean, std, n_trials)."""
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except OSError as exc:
        raise DataIoError(f"cannot read profile {path}: {exc}") from exc

    lines = text.splitlines()
    if not lines or lines[0] != PROFILE_HEADER:
        got = lines[0] if lines else "<empty file>"
        raise MalformedHeaderError(
            f"expected header {PROFILE_HEADER!r}, got {got!r}"
        )
    angles: list[float] = []
    means: list[float] = []
    stds: list[float] = []
    n_trials: Optional[int] = None
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split(",")
        if len(fields) != 4:
            raise DataIoError(
                f"profile line {lineno}: expected 4 fields, got {len(fields)}"
            )
        try:
            angles.append(float(fields[0]))
            means.append(float(fields[1]))
            stds.append(float(fields[2]))
            n = int(fields[3])
        except ValueError as exc:
            raise DataIoError(f"profile line {lineno}: {exc}") from exc
        if n_trials is None:
            n_trials = n
        elif n != n_trials:
            raise DataIoError(
                f"profile line {lineno}: inconsistent n_trials {n} vs {n_trials}"
            )
    if n_trials is None:
        raise DataIoError(f"profile {path} has no data rows")
    return (
        np.asarray(angles),
        np.asarray(means),
        np.asarray(stds),
        n_trials,
    )


# --- argument plumbing ------------------------------------------------------

def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {value}")
    return value


def _nonneg_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {value}")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (np.isfinite(value) and value > 0):
        raise argparse.ArgumentTypeError(f"must be a finite positive number, got {text}")
    return value


def _nonneg_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not (np.isfinite(value) and value >= 0):
        raise argparse.ArgumentTypeError(f"must be a finite non-negative number, got {text}")
    return value


def _finite_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not np.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text}")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="lumispec",
        description="Simulate and analyze angular fluorescence sweeps.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser(
        "simulate", help="synthesize a sweep run and write a run directory"
    )
    p_sim.add_argument(
        "--geometry", choices=("flat", "convex"), required=True,
        help="phantom surface under the scanner",
    )
    p_sim.add_argument(
        "--sphere-radius-mm", type=_positive_float, default=None,
        help="sphere radius; required for convex geometry",
    )
    p_sim.add_argument("--trials", type=_positive_int, default=3)
    p_sim.add_argument(
        "--seed", type=_nonneg_int, default=None,
        help=f"master seed (default: ${SEED_ENV_VAR} or 0)",
    )
    p_sim.add_argument("--noise-sigma", type=_nonneg_float, default=None)
    p_sim.add_argument("--kappa", type=_nonneg_float, default=None)
    p_sim.add_argument("--out", required=True, help="run directory to create")
    p_sim.add_argument("--start-deg", type=_finite_float, default=None)
    p_sim.add_argument("--step-deg", type=_positive_float, default=None)
    p_sim.add_argument("--n-steps", type=_positive_int, default=None)
    p_sim.add_argument(
        "--force", action="store_true",
        help="write into a non-empty output directory",
    )
    p_sim.set_defaults(func=cmd_simulate)

    p_ana = sub.add_parser(
        "analyze", help="run the AUC pipeline over a run directory"
    )
    p_ana.add_argument("--run", required=True, help="run directory to analyze")
    p_ana.add_argument("--cutoff-nm", type=_finite_float, default=450.0)
    p_ana.add_argument("--auc-lo", type=_finite_float, default=450.0)
    p_ana.add_argument("--auc-hi", type=_finite_float, default=750.0)
    p_ana.add_argument(
        "--pooling", choices=("per-trial", "pooled"), default="per-trial",
        help="normalize each trial by its own max, or all trials by one max",
    )
    p_ana.set_defaults(func=cmd_analyze)

    p_rep = sub.add_parser("report", help="summarize a profile.csv")
    p_rep.add_argument("--profile", required=True)
    p_rep.set_defaults(func=cmd_report)

    p_svg = sub.add_parser("export-svg", help="render a run or profile to SVG")
    p_svg.add_argument("--run", default=None)
    p_svg.add_argument("--profile", default=None)
    p_svg.add_argument("--out", required=True)
    p_svg.add_argument(
        "--which",
        choices=("spectra", "spectra-smoothed", "profile"),
        required=True,
        help="spectra = as recorded; spectra-smoothed = normalized and smoothed",
    )
    p_svg.set_defaults(func=cmd_export_svg)

    return parser


def _default_seed(parser: argparse.ArgumentParser) -> int:
    text = os.environ.get(SEED_ENV_VAR)
    if text is None:
        return 0
    try:
        value = int(text)
    except ValueError:
        parser.error(f"${SEED_ENV_VAR} is not an integer: {text!r}")
    if value < 0:
        parser.error(f"${SEED_ENV_VAR} must be >= 0, got {value}")
    return value


# --- commands ---------------------------------------------------------------

def cmd_simulate(args: argparse.Namespace) -> int:
    out = Path(args.out)
    if out.exists() and not out.is_dir():
        print(f"error: {out} exists and is not a directory", file=sys.stderr)
        return 1
    if out.is_dir() and any(out.iterdir()) and not args.force:
        print(
            f"error: output directory {out} is not empty (use --force to overwrite)",
            file=sys.stderr,
        )
        return 1

    plan_kwargs = {"trials": args.trials}
    if args.start_deg is not None:
        plan_kwargs["start_deg"] = args.start_deg
    if args.step_deg is not None:
        plan_kwargs["step_deg"] = args.step_deg
    if args.n_steps is not None:
        plan_kwargs["n_steps"] = args.n_steps
    plan = SweepPlan(**plan_kwargs)

    cfg_kwargs = {}
    if args.noise_sigma is not None:
        cfg_kwargs["noise_sigma"] = args.noise_sigma
    if args.kappa is not None:
        cfg_kwargs["angular"] = AngularResponse(kappa=args.kappa)
    config = OpticalConfig(**cfg_kwargs)

    pivot = PivotGeometry()
    surface: SurfaceModel
    if args.geometry == "convex":
        surface = SphereSurface(radius_mm=args.sphere_radius_mm)
    else:
        surface = FlatSurface()

    def factory(trial: int, seed: int) -> AcquisitionPort:
        return SimulatedPort(config=config, pivot=pivot, surface=surface, seed=seed)

    records = run_triplicate(plan, factory, master_seed=args.seed)
    dataio.write_run(records, out)
    print(f"wrote {out} ({plan.trials} trials x {plan.n_steps} steps)")
    return 0


def _raw_auc_matrix(
    records: list[SweepRecord], cfg: PipelineConfig
) -> np.ndarray:
    """Pipeline AUC for every (trial, step); failures name their locus."""
    rows = []
    for record in records:
        row = []
        for angle, spectrum in record.entries:
            try:
                row.append(run_pipeline(spectrum, cfg))
            except LumispecError as exc:
                raise type(exc)(
                    f"trial {record.trial_index}, angle {angle:+.1f} deg: {exc}"
                ) from exc
        rows.append(row)
    return np.asarray(rows)


def cmd_analyze(args: argparse.Namespace) -> int:
    records = dataio.read_run(args.run)
    cfg = PipelineConfig(
        norm_cutoff_nm=args.cutoff_nm,
        auc_lo_nm=args.auc_lo,
        auc_hi_nm=args.auc_hi,
    )
    angles = np.asarray(records[0].plan.angles())
    raw = _raw_auc_matrix(records, cfg)

    if args.pooling == "per-trial":
        # Each trial normalized by its own max, cancelling any per-trial gain.
        norm = np.vstack(
            [auc_profile(row, angles).auc_norm for row in raw]
        )
    else:
        if not (np.all(np.isfinite(raw)) and raw.max() > 0):
            raise DataIoError("pooled normalization needs positive finite AUCs")
        norm = raw / raw.max()

    mean = norm.mean(axis=0)
    std = norm.std(axis=0)
    # Rescale so the reported mean profile peaks at exactly 1.
    scale = mean.max()
    mean = mean / scale
    std = std / scale

    profile_path = Path(args.run) / PROFILE_FILE
    write_profile(profile_path, angles, mean, std, len(records))
    print(f"wrote {profile_path}")
    return 0


def cmd_report(args: argparse.Namespace) -> int:
    angles, mean, _std, _n = read_profile(args.profile)
    profile = auc_profile(mean, angles)
    stats = profile_stats(profile)
    print(
        f"mean={stats.mean_auc:.2f} std={stats.std_auc:.2f} "
        f"span95=±{stats.span95_deg:.1f}deg"
    )
    return 0


def cmd_export_svg(args: argparse.Namespace) -> int:
    if args.which in ("spectra", "spectra-smoothed"):
        if args.run is None:
            raise LayoutError(f"--which {args.which} requires --run")
        records = dataio.read_run(args.run)
        grid = records[0].entries[0][1].wavelengths_nm
        smoothed = args.which == "spectra-smoothed"

        def view(spectrum):
            if not np.array_equal(spectrum.wavelengths_nm, grid):
                raise LayoutError(
                    "spectra in the run do not share one wavelength grid"
                )
            if smoothed:
                spectrum = smooth_window2(normalize_above_cutoff(spectrum))
            return spectrum.intensities

        n_steps = records[0].plan.n_steps
        series = []
        for step in range(n_steps):
            stack = np.vstack(
                [view(record.entries[step][1]) for record in records]
            )
            series.append((grid, stack.mean(axis=0)))
        svg = render_line_chart(
            series,
            title=(
                "Normalized smoothed spectra across the sweep (trial average)"
                if smoothed
                else "Emission spectra across the sweep (trial average)"
            ),
            x_label="wavelength (nm)",
            y_label="normalized intensity" if smoothed else "intensity (arb. units)",
            x_range=(400.0, 800.0),
        )
    else:
        if args.profile is None:
            raise LayoutError("--which profile requires --profile")
        angles, mean, _std, _n = read_profile(args.profile)
        svg = render_line_chart(
            [(angles, mean)],
            title="Normalized AUC vs sweep angle",
            x_label="motor angle (deg)",
            y_label="normalized AUC",
            hline=0.95,
            markers=True,
        )

    try:
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(svg)
    except OSError as exc:
        raise DataIoError(f"cannot write SVG {args.out}: {exc}") from exc
    print(f"wrote {args.out}")
    return 0


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if getattr(args, "seed", None) is None and args.command == "simulate":
            args.seed = _default_seed(parser)
        if args.command == "simulate" and args.geometry == "convex":
            if args.sphere_radius_mm is None:
                parser.error("--geometry convex requires --sphere-radius-mm")
        if args.command == "simulate" and args.geometry == "flat":
            if args.sphere_radius_mm is not None:
                parser.error("--sphere-radius-mm is only valid with --geometry convex")
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0

    try:
        return args.func(args)
    except LumispecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
