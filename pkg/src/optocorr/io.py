"""File formats: envelope CSV + JSON sidecar, run directories, JSON reports.

Floats are written with ``repr`` so a write/read round trip is exact.
"""

from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from .engine import Calibration, RunRecord
from .noise import ComplexEnvelope

SCHEMA_VERSION = 1

ENVELOPE_COLUMNS = ("t_seconds", "X", "Y", "unit", "center_freq_hz", "sample_rate_hz")
RUN_CHANNELS = ("signal_out", "meter_out", "meter_displacement")


def canonical_json(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def digest(obj) -> str:
    return hashlib.sha256(canonical_json(obj).encode()).hexdigest()


def file_digest(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_json(path, obj):
    Path(path).write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def read_json(path):
    return json.loads(Path(path).read_text())


def _header(meta: dict) -> list[str]:
    return [f"# {k}={meta[k]}" for k in sorted(meta)]


def write_envelope(env: ComplexEnvelope, path, meta: dict | None = None):
    """Write ``<path>.csv`` and ``<path>.json``.

    ``meta`` (seed, config digest, noise spec, ...) goes into the sidecar; its
    scalar entries are also repeated as ``# key=value`` lines at the top of
    the CSV.
    """
    path = Path(path)
    meta = dict(meta or {})
    scalars = {k: v for k, v in meta.items() if isinstance(v, (int, float, str))}
    csv_path = path.with_suffix(".csv")
    with open(csv_path, "w", newline="") as fh:
        for line in _header(scalars):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(ENVELOPE_COLUMNS)
        fs, fc = repr(float(env.sample_rate)), repr(float(env.center_freq))
        for i, z in enumerate(env.samples):
            w.writerow((repr(i / env.sample_rate), repr(float(z.real)), repr(float(z.imag)), env.unit, fc, fs))
    sidecar = {
        "schema_version": SCHEMA_VERSION,
        "unit": env.unit,
        "center_freq_hz": float(env.center_freq),
        "sample_rate_hz": float(env.sample_rate),
        "n_samples": len(env),
        **meta,
    }
    write_json(path.with_suffix(".json"), sidecar)
    return csv_path


def read_envelope(path) -> ComplexEnvelope:
    path = Path(path).with_suffix(".csv")
    with open(path, newline="") as fh:
        rows = csv.reader(line for line in fh if not line.startswith("#"))
        header = next(rows)
        if tuple(header) != ENVELOPE_COLUMNS:
            raise ValueError(f"{path}: unexpected envelope header {header}")
        body = list(rows)
    if not body:
        raise ValueError(f"{path}: envelope has no samples")
    samples = np.array([float(r[1]) + 1j * float(r[2]) for r in body])
    unit, fc, fs = body[0][3], float(body[0][4]), float(body[0][5])
    return ComplexEnvelope(samples, fs, fc, unit)


def write_run(record: RunRecord, directory, meta: dict | None = None) -> list[Path]:
    """Write the three channel envelopes of ``record`` into ``directory``."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {"seed": record.seed, **(meta or {})}
    return [
        write_envelope(getattr(record, name), directory / name, {**meta, "channel": name})
        for name in RUN_CHANNELS
    ]


def read_run(directory, params=None) -> RunRecord:
    """Load a run directory written by :func:`write_run` plus its manifest."""
    from .config import params_from_dict

    directory = Path(directory)
    manifest = read_json(directory / "manifest.json")
    if params is None:
        params = params_from_dict(manifest["config"])
    envs = {name: read_envelope(directory / name) for name in RUN_CHANNELS}
    calibration = Calibration.from_dict(manifest.get("calibration", {}))
    return RunRecord(seed=manifest["seed"], params=params, calibration=calibration, **envs)


def write_histogram(hist, path, meta: dict | None = None):
    with open(path, "w", newline="") as fh:
        for line in _header(meta or {}):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("bin_x_center", "bin_y_center", "probability"))
        for x, y, p in hist.rows():
            w.writerow((repr(float(x)), repr(float(y)), repr(float(p))))


def write_sweep_csv(trace, path, meta: dict | None = None):
    with open(path, "w", newline="") as fh:
        for line in _header(meta or {}):
            fh.write(line + "\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(("n_runs", "estimate", "estimate_moments", "estimate_per_run", "per_run", "halfwidth"))
        for row in zip(
            trace.n_runs, trace.estimate, trace.estimate_moments,
            trace.estimate_per_run, trace.per_run, trace.halfwidth,
        ):
            w.writerow((int(row[0]),) + tuple(repr(float(v)) for v in row[1:]))
