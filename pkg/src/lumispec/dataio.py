"""Byte-stable file formats for spectra and sweep runs.

Two plain-text formats, chosen so files are inspectable, diffable, and
easy for external spectrometer-export tooling to produce:

* Spectrum file: UTF-8, LF endings, header ``wavelength_nm,intensity``,
  then one ``%.6f,%.9e`` row per sample in ascending wavelength order.
* Run directory: ``meta.txt`` (``key=value`` lines in a fixed order),
  ``manifest.csv`` (``trial,step_index,motor_angle_deg,spectrum_file``),
  and one spectrum file per acquisition named ``t{trial}_s{step:02}.csv``.

Serialization is deterministic: the same records always produce byte-
identical directories. Sweep angles are reconstructed from the stored plan
by index arithmetic on read; the manifest's angle column is validated
against the plan within 1e-6 deg but never used as the value of record.
"""

from __future__ import annotations

import os
from pathlib import Path
from typing import Union

import numpy as np

from .engine import RunMeta, SweepPlan, SweepRecord
from .errors import (
    DataIoError,
    LayoutError,
    MalformedHeaderError,
    MetaError,
    NonMonotonicWavelengthError,
    SpectrumParseError,
)
from .spectral import Spectrum

PathLike = Union[str, os.PathLike]

SPECTRUM_HEADER = "wavelength_nm,intensity"
MANIFEST_HEADER = "trial,step_index,motor_angle_deg,spectrum_file"
META_FILE = "meta.txt"
MANIFEST_FILE = "manifest.csv"
LOCK_FILE = ".lock"

# Fixed meta.txt key order; files are byte-stable only if this never varies.
META_KEYS = (
    "schema_version",
    "geometry",
    "sphere_radius_mm",
    "working_distance_mm",
    "seed",
    "noise_sigma",
    "kappa",
    "start_deg",
    "step_deg",
    "n_steps",
    "trials",
    "settle_s",
)

SCHEMA_VERSION = 1

_MANIFEST_ANGLE_TOL_DEG = 1e-6


def spectrum_filename(trial: int, step: int) -> str:
    return f"t{trial}_s{step:02}.csv"


# --- spectrum files ---------------------------------------------------------

def write_spectrum(spectrum: Spectrum, path: PathLike) -> None:
    """Write one spectrum in the canonical text format."""
    lines = [SPECTRUM_HEADER]
    for w, i in zip(spectrum.wavelengths_nm, spectrum.intensities):
        lines.append("%.6f,%.9e" % (w, i))
    text = "\n".join(lines) + "\n"
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIoError(f"cannot write spectrum file {path}: {exc}") from exc


def read_spectrum(path: PathLike) -> Spectrum:
    """Parse a canonical spectrum file back into a Spectrum.

    Failures carry a 1-based line number where applicable (line 1 is the
    header).
    """
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            text = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataIoError(f"cannot read spectrum file {path}: {exc}") from exc

    lines = text.splitlines()
    if not lines or lines[0] != SPECTRUM_HEADER:
        got = lines[0] if lines else "<empty file>"
        raise MalformedHeaderError(
            f"expected header {SPECTRUM_HEADER!r}, got {got!r}"
        )

    wavelengths: list[float] = []
    intensities: list[float] = []
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split(",")
        if len(fields) != 2:
            raise SpectrumParseError(
                f"expected 2 comma-separated fields, got {len(fields)}",
                line=lineno,
            )
        try:
            w = float(fields[0])
            i = float(fields[1])
        except ValueError as exc:
            raise SpectrumParseError(str(exc), line=lineno) from exc
        if not (np.isfinite(w) and np.isfinite(i)):
            raise SpectrumParseError("non-finite value", line=lineno)
        if wavelengths and w <= wavelengths[-1]:
            raise NonMonotonicWavelengthError(
                f"wavelength {w!r} does not increase past {wavelengths[-1]!r}",
                line=lineno,
            )
        wavelengths.append(w)
        intensities.append(i)

    if len(wavelengths) < 2:
        raise SpectrumParseError(
            f"spectrum needs at least 2 samples, found {len(wavelengths)}"
        )
    return Spectrum(np.asarray(wavelengths), np.asarray(intensities))


# --- run directories --------------------------------------------------------

def _format_meta_value(key: str, plan: SweepPlan, meta: RunMeta) -> str:
    if key == "schema_version":
        return str(meta.schema_version)
    if key == "geometry":
        return meta.geometry
    if key == "sphere_radius_mm":
        return "none" if meta.sphere_radius_mm is None else repr(float(meta.sphere_radius_mm))
    if key == "working_distance_mm":
        return repr(float(meta.working_distance_mm))
    if key == "seed":
        return str(meta.seed)
    if key == "noise_sigma":
        return repr(float(meta.noise_sigma))
    if key == "kappa":
        return repr(float(meta.kappa))
    if key == "start_deg":
        return repr(float(plan.start_deg))
    if key == "step_deg":
        return repr(float(plan.step_deg))
    if key == "n_steps":
        return str(plan.n_steps)
    if key == "trials":
        return str(plan.trials)
    if key == "settle_s":
        return repr(float(plan.settle_s))
    raise AssertionError(f"unhandled meta key {key!r}")


def write_run(records: list[SweepRecord], run_dir: PathLike) -> None:
    """Persist a full run (all trials) as a canonical run directory.

    All records must share one plan and one meta block, with distinct trial
    indices covering 0..trials-1. A best-effort ``.lock`` file guards
    against concurrent writers; it is removed when the write finishes.
    """
    if not records:
        raise ValueError("write_run requires at least one record")
    plan = records[0].plan
    meta = records[0].meta
    for record in records[1:]:
        if record.plan != plan:
            raise ValueError("all records in a run must share one plan")
        if record.meta != meta:
            raise ValueError("all records in a run must share one meta block")
    trials = sorted(record.trial_index for record in records)
    if trials != list(range(plan.trials)):
        raise ValueError(
            f"records must cover trial indices 0..{plan.trials - 1} exactly, "
            f"got {trials}"
        )

    out = Path(run_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise DataIoError(f"cannot create run directory {out}: {exc}") from exc

    lock = out / LOCK_FILE
    try:
        lock_fh = open(lock, "x", encoding="utf-8")
    except FileExistsError:
        raise DataIoError(
            f"run directory {out} is locked by another writer ({lock} exists)"
        ) from None
    except OSError as exc:
        raise DataIoError(f"cannot create lock file {lock}: {exc}") from exc

    try:
        lock_fh.close()
        meta_lines = [
            f"{key}={_format_meta_value(key, plan, meta)}" for key in META_KEYS
        ]
        _write_text(out / META_FILE, "\n".join(meta_lines) + "\n")

        manifest_lines = [MANIFEST_HEADER]
        for record in sorted(records, key=lambda r: r.trial_index):
            for step, (angle, spectrum) in enumerate(record.entries):
                name = spectrum_filename(record.trial_index, step)
                manifest_lines.append(
                    "%d,%d,%.6f,%s" % (record.trial_index, step, angle, name)
                )
                write_spectrum(spectrum, out / name)
        _write_text(out / MANIFEST_FILE, "\n".join(manifest_lines) + "\n")
    finally:
        try:
            lock.unlink()
        except OSError:
            pass


def _write_text(path: Path, text: str) -> None:
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    except OSError as exc:
        raise DataIoError(f"cannot write {path}: {exc}") from exc


def _read_text(path: Path, what: str) -> str:
    if not path.is_file():
        raise LayoutError(f"missing {what}: {path}")
    try:
        with open(path, "r", encoding="utf-8", newline="") as fh:
            return fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        raise DataIoError(f"cannot read {what} {path}: {exc}") from exc


def _parse_meta(text: str) -> dict[str, str]:
    values: dict[str, str] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        if raw == "":
            continue
        key, sep, value = raw.partition("=")
        if not sep:
            raise MetaError(f"meta.txt line {lineno}: expected key=value, got {raw!r}")
        if key in values:
            raise MetaError(f"meta.txt line {lineno}: duplicate key {key!r}")
        values[key] = value
    for key in META_KEYS:
        if key not in values:
            raise MetaError(f"meta.txt is missing key {key!r}")
    for key in values:
        if key not in META_KEYS:
            raise MetaError(f"meta.txt has unexpected key {key!r}")
    return values


def _meta_float(values: dict[str, str], key: str) -> float:
    try:
        out = float(values[key])
    except ValueError as exc:
        raise MetaError(f"meta.txt key {key!r}: {exc}") from exc
    if not np.isfinite(out):
        raise MetaError(f"meta.txt key {key!r} is not finite")
    return out


def _meta_int(values: dict[str, str], key: str) -> int:
    try:
        return int(values[key])
    except ValueError as exc:
        raise MetaError(f"meta.txt key {key!r}: {exc}") from exc


def read_run_header(run_dir: PathLike) -> tuple[SweepPlan, RunMeta]:
    """Parse only meta.txt, returning the run's plan and meta block."""
    out = Path(run_dir)
    values = _parse_meta(_read_text(out / META_FILE, META_FILE))

    schema = _meta_int(values, "schema_version")
    if schema != SCHEMA_VERSION:
        raise MetaError(f"unsupported schema_version {schema} (expected {SCHEMA_VERSION})")

    radius_text = values["sphere_radius_mm"]
    radius = None if radius_text == "none" else _meta_float(values, "sphere_radius_mm")

    try:
        plan = SweepPlan(
            start_deg=_meta_float(values, "start_deg"),
            step_deg=_meta_float(values, "step_deg"),
            n_steps=_meta_int(values, "n_steps"),
            trials=_meta_int(values, "trials"),
            settle_s=_meta_float(values, "settle_s"),
        )
        meta = RunMeta(
            geometry=values["geometry"],
            sphere_radius_mm=radius,
            working_distance_mm=_meta_float(values, "working_distance_mm"),
            seed=_meta_int(values, "seed"),
            noise_sigma=_meta_float(values, "noise_sigma"),
            kappa=_meta_float(values, "kappa"),
            schema_version=schema,
        )
    except ValueError as exc:
        raise MetaError(f"meta.txt describes an invalid run: {exc}") from exc
    return plan, meta


def _parse_manifest(text: str, plan: SweepPlan) -> dict[tuple[int, int], str]:
    lines = text.splitlines()
    if not lines or lines[0] != MANIFEST_HEADER:
        got = lines[0] if lines else "<empty file>"
        raise LayoutError(f"manifest.csv: expected header {MANIFEST_HEADER!r}, got {got!r}")

    files: dict[tuple[int, int], str] = {}
    for lineno, raw in enumerate(lines[1:], start=2):
        fields = raw.split(",")
        if len(fields) != 4:
            raise LayoutError(
                f"manifest.csv line {lineno}: expected 4 fields, got {len(fields)}"
            )
        try:
            trial = int(fields[0])
            step = int(fields[1])
            angle = float(fields[2])
        except ValueError as exc:
            raise LayoutError(f"manifest.csv line {lineno}: {exc}") from exc
        name = fields[3]
        if not (0 <= trial < plan.trials):
            raise LayoutError(
                f"manifest.csv line {lineno}: trial {trial} outside 0..{plan.trials - 1}"
            )
        if not (0 <= step < plan.n_steps):
            raise LayoutError(
                f"manifest.csv line {lineno}: step {step} outside 0..{plan.n_steps - 1}"
            )
        if (trial, step) in files:
            raise LayoutError(
                f"manifest.csv line {lineno}: duplicate entry for trial {trial} step {step}"
            )
        if not np.isfinite(angle) or abs(angle - plan.angle(step)) > _MANIFEST_ANGLE_TOL_DEG:
            raise LayoutError(
                f"manifest.csv line {lineno}: angle {angle!r} deviates from plan "
                f"angle {plan.angle(step)!r} by more than {_MANIFEST_ANGLE_TOL_DEG:g} deg"
            )
        files[(trial, step)] = name

    expected = plan.trials * plan.n_steps
    if len(files) != expected:
        raise LayoutError(
            f"manifest.csv has {len(files)} entries, expected {expected} "
            f"({plan.trials} trials x {plan.n_steps} steps)"
        )
    return files


def read_run(run_dir: PathLike) -> list[SweepRecord]:
    """Load a run directory back into SweepRecords ordered by trial index.

    Angles come from the stored plan by index arithmetic, so a write/read
    cycle reproduces them bit-for-bit. Spectrum parse failures are re-raised
    as the same error type with the offending filename prefixed.
    """
    out = Path(run_dir)
    plan, meta = read_run_header(out)
    files = _parse_manifest(_read_text(out / MANIFEST_FILE, MANIFEST_FILE), plan)

    missing = sorted(
        name for name in set(files.values()) if not (out / name).is_file()
    )
    if missing:
        raise LayoutError(
            f"run directory {out} is missing spectrum files: {', '.join(missing)}"
        )

    records = []
    for trial in range(plan.trials):
        entries = []
        for step in range(plan.n_steps):
            name = files[(trial, step)]
            try:
                spectrum = read_spectrum(out / name)
            except (
                MalformedHeaderError,
                SpectrumParseError,
                NonMonotonicWavelengthError,
                DataIoError,
            ) as exc:
                raise _with_file_locus(exc, name) from exc
            entries.append((plan.angle(step), spectrum))
        records.append(
            SweepRecord(
                plan=plan, trial_index=trial, entries=tuple(entries), meta=meta
            )
        )
    return records


def _with_file_locus(exc: Exception, name: str) -> Exception:
    """Rebuild a spectrum error with the filename prefixed to its message."""
    message = f"{name}: {exc}"
    if isinstance(exc, (SpectrumParseError, NonMonotonicWavelengthError)):
        return type(exc)(message, line=exc.line)
    return type(exc)(message)
