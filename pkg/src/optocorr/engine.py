"""One synchronized dual-channel I/Q acquisition, and sweeps of them."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .noise import (
    ComplexEnvelope,
    band_weights,
    gen_drive_envelope,
    gen_shot_floor,
    gen_thermal_envelope,
)
from .physics import (
    ExperimentParams,
    intensity_reflection,
    phase_transfer,
    radiation_displacement_transfer,
)


def _unit(z: complex) -> complex:
    z = complex(z)
    return z / abs(z)


@dataclass(frozen=True)
class Calibration:
    """Unit-modulus rotations applied to each stored channel."""

    signal: complex = 1.0 + 0j
    meter: complex = 1.0 + 0j
    displacement: complex = 1.0 + 0j

    def __mul__(self, other: "Calibration") -> "Calibration":
        return Calibration(
            self.signal * other.signal,
            self.meter * other.meter,
            self.displacement * other.displacement,
        )

    def to_dict(self) -> dict:
        return {
            name: [getattr(self, name).real, getattr(self, name).imag]
            for name in ("signal", "meter", "displacement")
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Calibration":
        return cls(**{k: complex(*v) for k, v in d.items()})


@dataclass(frozen=True, eq=False)
class RunRecord:
    signal_out: ComplexEnvelope
    meter_out: ComplexEnvelope
    meter_displacement: ComplexEnvelope
    seed: int
    params: ExperimentParams
    calibration: Calibration = field(default_factory=Calibration)

    def __post_init__(self):
        envs = (self.signal_out, self.meter_out, self.meter_displacement)
        if len({(len(e), e.sample_rate, e.center_freq) for e in envs}) != 1:
            raise ValueError("record channels must share length, sample rate and center frequency")


def _acquire(params: ExperimentParams, spectrum: np.ndarray) -> np.ndarray:
    # analyzer resolution filter: brick-wall at ±analysis_bandwidth/2
    gain = np.sqrt(band_weights(spectrum.size, params.envelope_rate, params.analysis_bandwidth))
    return np.fft.ifft(gain * spectrum)


def _spectra(params: ExperimentParams, seed: int):
    n = params.n_samples
    sources = (
        gen_drive_envelope(params, seed),
        gen_thermal_envelope(params, seed),
        gen_shot_floor(params, seed),
    )
    for env in sources:
        if len(env) != n or env.sample_rate != params.envelope_rate:
            raise ValueError("generated envelope does not match the run's duration/sample rate")
    freqs = params.center_freq + np.fft.fftfreq(n, d=1.0 / params.envelope_rate)
    drive, thermal, shot = (np.fft.fft(env.samples) for env in sources)
    return freqs, drive, thermal, shot


def mirror_motion(params: ExperimentParams, seed: int) -> dict[str, ComplexEnvelope]:
    """Acquisition-filtered displacement components of one run, in meters.

    Keys: ``thermal``, ``radiation``, ``shot`` and their sum ``total``.  Same
    random draws as :func:`run_experiment` for the same seed.
    """
    freqs, drive, thermal, shot = _spectra(params, seed)
    rad = radiation_displacement_transfer(params, freqs) * drive
    parts = {"thermal": thermal, "radiation": rad, "shot": shot, "total": thermal + rad + shot}
    fs, fc = params.envelope_rate, params.center_freq
    return {k: ComplexEnvelope(_acquire(params, v), fs, fc, "m") for k, v in parts.items()}


def run_experiment(params: ExperimentParams, seed: int | None = None) -> RunRecord:
    """Simulate one acquisition of reflected signal intensity and meter phase.

    The drive is pushed through the radiation-pressure transfer bin by bin,
    summed with thermal motion, read out through the cavity phase response
    together with the displacement-equivalent shot noise, and both channels
    are band-limited to the analysis bandwidth.  The returned record is
    uncalibrated; see :func:`calibrate_meter`.
    """
    seed = params.seed if seed is None else int(seed)
    freqs, drive, thermal, shot = _spectra(params, seed)

    motion = thermal + radiation_displacement_transfer(params, freqs) * drive
    meter = phase_transfer(params.cavity, freqs) * (motion + shot)
    signal = intensity_reflection(params.cavity, freqs) * drive

    fs, fc = params.envelope_rate, params.center_freq
    signal_out = ComplexEnvelope(_acquire(params, signal), fs, fc, "photons/s")
    meter_out = ComplexEnvelope(_acquire(params, meter), fs, fc, "rad")
    displacement = meter_out.with_samples(
        meter_out.samples / phase_transfer(params.cavity, fc), unit="m"
    )
    return RunRecord(signal_out, meter_out, displacement, seed, params)


def calibration_for(params: ExperimentParams) -> Calibration:
    """Rotations that make noiseless channels positive multiples of the drive."""
    fc = params.center_freq
    h_phi = phase_transfer(params.cavity, fc)
    h_rad = radiation_displacement_transfer(params, fc)
    return Calibration(
        signal=_unit(intensity_reflection(params.cavity, fc)).conjugate(),
        meter=_unit(h_phi * h_rad).conjugate(),
        displacement=_unit(h_rad).conjugate(),
    )


def calibrate_meter(record: RunRecord) -> RunRecord:
    """Rotate both channels in phase space to undo the cavity and mechanical phases.

    Composes with any calibration already applied, so calling it twice is
    the same as one rotation by the squared factors.
    """
    rot = calibration_for(record.params)
    return dataclasses.replace(
        record,
        signal_out=record.signal_out.with_samples(record.signal_out.samples * rot.signal),
        meter_out=record.meter_out.with_samples(record.meter_out.samples * rot.meter),
        meter_displacement=record.meter_displacement.with_samples(
            record.meter_displacement.samples * rot.displacement
        ),
        calibration=record.calibration * rot,
    )


def run_sweep(
    params: ExperimentParams,
    n_runs: int,
    base_seed: int | None = None,
    workers: int | None = None,
) -> list[RunRecord]:
    """Independent runs with seeds ``base_seed .. base_seed + n_runs - 1``, in seed order."""
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    base_seed = params.seed if base_seed is None else int(base_seed)
    seeds = range(base_seed, base_seed + n_runs)
    if workers and workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(lambda s: run_experiment(params, s), seeds))
    return [run_experiment(params, s) for s in seeds]
