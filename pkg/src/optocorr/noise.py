"""Seeded complex Gaussian envelopes for the drive, thermal and shot noise.

All generators colour white complex Gaussian draws in the frequency domain
and inverse-transform them, so records are periodic and exactly
band-limited.  PSD convention: an envelope with one-sided PSD ``S`` over a
band of width ``B`` has mean square ``E|z|^2 = S * B``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .physics import (
    K_B,
    TWO_PI,
    ExperimentParams,
    phase_transfer,
    radiation_displacement_transfer,
    susceptibility,
)

# one independent random stream per noise source
STREAMS = {"band": 0, "drive": 1, "thermal": 2, "shot": 3}

# thermal noise is coloured exactly within this many analysis bandwidths of resonance
NEAR_RESONANCE_BANDWIDTHS = 10.0


class InvalidSpecError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class ComplexEnvelope:
    """Uniformly sampled X + iY quadratures about ``center_freq``."""

    samples: np.ndarray
    sample_rate: float
    center_freq: float
    unit: str

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=complex)
        if samples.ndim != 1 or samples.size == 0:
            raise ValueError("envelope samples must be a non-empty 1-D array")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def __len__(self):
        return self.samples.size

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate

    @property
    def times(self) -> np.ndarray:
        return np.arange(self.samples.size) / self.sample_rate

    @property
    def x(self) -> np.ndarray:
        return self.samples.real

    @property
    def y(self) -> np.ndarray:
        return self.samples.imag

    def mean_square(self) -> float:
        return float(np.mean(np.abs(self.samples) ** 2))

    def with_samples(self, samples, unit=None) -> "ComplexEnvelope":
        return ComplexEnvelope(samples, self.sample_rate, self.center_freq, unit or self.unit)


@dataclass(frozen=True)
class NoiseSpec:
    bandwidth: float
    target_psd: float
    seed: int
    duration: float
    sample_rate: float
    center_freq: float = 0.0
    unit: str = "arb"

    @property
    def n_samples(self) -> int:
        return int(round(self.sample_rate * self.duration))

    def validate(self):
        if not self.sample_rate > 0 or not self.duration > 0:
            raise InvalidSpecError("sample_rate and duration must be positive")
        if not self.bandwidth > 0:
            raise InvalidSpecError("bandwidth must be positive")
        if self.bandwidth > self.sample_rate:
            raise InvalidSpecError(
                f"bandwidth {self.bandwidth} Hz exceeds sample_rate {self.sample_rate} Hz"
            )
        if self.target_psd < 0:
            raise InvalidSpecError("target_psd must be non-negative")
        if self.n_samples < 1:
            raise InvalidSpecError("duration * sample_rate rounds to zero samples")


def make_rng(seed: int, stream: str) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream)``.

    Distinct seeds or stream names give statistically independent Philox
    streams, so run ``i`` of a sweep can use ``base_seed + i`` safely.
    """
    ss = np.random.SeedSequence(int(seed), spawn_key=(STREAMS[stream],))
    return np.random.Generator(np.random.Philox(ss))


def band_weights(n: int, sample_rate: float, bandwidth: float) -> np.ndarray:
    """Fraction of each FFT bin's cell lying inside ``[-bandwidth/2, bandwidth/2]``.

    Bins are in ``np.fft.fftfreq`` order.  Edge bins that straddle the band
    limit get fractional weight, so the weights always sum to
    ``bandwidth / df``; the band is treated as periodic in ``sample_rate``.
    """
    df = sample_rate / n
    f = np.fft.fftfreq(n, d=1.0 / sample_rate)
    lo, hi = -bandwidth / 2, bandwidth / 2
    w = np.zeros(n)
    for shift in (-sample_rate, 0.0, sample_rate):
        left = np.maximum(f - df / 2, lo + shift)
        right = np.minimum(f + df / 2, hi + shift)
        w += np.clip(right - left, 0.0, None)
    return np.clip(w / df, 0.0, 1.0)


def _white_bins(rng: np.random.Generator, n: int) -> np.ndarray:
    # unit-variance circular complex Gaussians, one per bin
    draws = rng.standard_normal((2, n))
    return (draws[0] + 1j * draws[1]) / np.sqrt(2.0)


def colored_envelope(rng, n, sample_rate, psd_bins) -> np.ndarray:
    """Synthesise ``n`` samples whose per-bin one-sided PSD is ``psd_bins``.

    ``psd_bins`` is in fftfreq order and already includes any band weights.
    """
    amplitude = np.sqrt(n * sample_rate * np.asarray(psd_bins, dtype=float))
    return np.fft.ifft(amplitude * _white_bins(rng, n))


def gen_band_limited_gaussian(spec: NoiseSpec) -> ComplexEnvelope:
    """Flat complex Gaussian noise confined to ``±bandwidth/2`` of baseband."""
    spec.validate()
    n = spec.n_samples
    rng = make_rng(spec.seed, "band")
    psd = spec.target_psd * band_weights(n, spec.sample_rate, spec.bandwidth)
    samples = colored_envelope(rng, n, spec.sample_rate, psd)
    return ComplexEnvelope(samples, spec.sample_rate, spec.center_freq, spec.unit)


def apply_band(env: ComplexEnvelope, bandwidth: float) -> ComplexEnvelope:
    """Brick-wall filter to ``±bandwidth/2`` (half-power edge bins)."""
    n = len(env)
    gain = np.sqrt(band_weights(n, env.sample_rate, bandwidth))
    return env.with_samples(np.fft.ifft(gain * np.fft.fft(env.samples)))


def band_mean_square(env: ComplexEnvelope, bandwidth: float) -> float:
    """Mean square of ``env`` after restricting it to ``±bandwidth/2``."""
    n = len(env)
    spectrum = np.abs(np.fft.fft(env.samples)) ** 2
    return float(np.sum(band_weights(n, env.sample_rate, bandwidth) * spectrum) / n**2)


def thermal_psd(params: ExperimentParams, freq):
    """One-sided thermal displacement PSD 4 k_B T Im(chi) / Omega, m^2/Hz."""
    f = np.asarray(freq, dtype=float)
    if np.any(f <= 0):
        raise ValueError("thermal_psd is undefined at non-positive frequency")
    chi = susceptibility(params.oscillator, f)
    psd = 4.0 * K_B * params.temperature * chi.imag / (TWO_PI * f)
    return psd if psd.ndim else float(psd)


def drive_psd(params: ExperimentParams) -> float:
    """Photon-flux PSD that puts S_rad = drive_ratio * S_T at the center frequency."""
    h = radiation_displacement_transfer(params, params.center_freq)
    return params.drive_ratio * thermal_psd(params, params.center_freq) / abs(h) ** 2


def _baseband(params: ExperimentParams):
    n = params.n_samples
    fs = params.envelope_rate
    return n, fs, np.fft.fftfreq(n, d=1.0 / fs), band_weights(n, fs, params.drive_bandwidth)


def gen_drive_envelope(params: ExperimentParams, seed: int | None = None) -> ComplexEnvelope:
    """Incident signal-intensity quadratures X + iY, photons/s.

    Flat over ``drive_bandwidth`` at the level from :func:`drive_psd`.
    """
    seed = params.seed if seed is None else seed
    n, fs, _, weights = _baseband(params)
    samples = colored_envelope(make_rng(seed, "drive"), n, fs, drive_psd(params) * weights)
    return ComplexEnvelope(samples, fs, params.center_freq, "photons/s")


def near_resonance(params: ExperimentParams) -> bool:
    detuning = abs(params.center_freq - params.oscillator.resonance_freq)
    return detuning < NEAR_RESONANCE_BANDWIDTHS * params.analysis_bandwidth


def gen_thermal_envelope(params: ExperimentParams, seed: int | None = None) -> ComplexEnvelope:
    """Brownian displacement of the mirror mode, meters.

    Far from resonance the PSD is taken flat at its center-frequency value.
    Within ten analysis bandwidths of resonance each bin is coloured with
    the exact spectrum at ``center_freq + offset``.
    """
    seed = params.seed if seed is None else seed
    n, fs, offsets, weights = _baseband(params)
    psd = np.zeros(n)
    inside = weights > 0
    if near_resonance(params):
        psd[inside] = thermal_psd(params, params.center_freq + offsets[inside])
    else:
        psd[inside] = thermal_psd(params, params.center_freq)
    samples = colored_envelope(make_rng(seed, "thermal"), n, fs, psd * weights)
    return ComplexEnvelope(samples, fs, params.center_freq, "m")


def gen_shot_floor(params: ExperimentParams, seed: int | None = None) -> ComplexEnvelope:
    """Displacement-equivalent meter shot noise with ASD ``beams.effective_floor``."""
    seed = params.seed if seed is None else seed
    n, fs, _, weights = _baseband(params)
    level = params.beams.effective_floor**2
    samples = colored_envelope(make_rng(seed, "shot"), n, fs, level * weights)
    return ComplexEnvelope(samples, fs, params.center_freq, "m")


def noise_budget(params: ExperimentParams) -> dict:
    """PSDs of every displacement-equivalent source at the center frequency."""
    fc = params.center_freq
    s_thermal = thermal_psd(params, fc)
    s_drive_x = abs(radiation_displacement_transfer(params, fc)) ** 2 * drive_psd(params)
    s_shot = params.beams.effective_floor**2

    def db(a, b):
        if a == 0 or b == 0:
            return None
        return float(10 * np.log10(a / b))

    return {
        "center_freq_hz": fc,
        "thermal_psd_m2_per_hz": s_thermal,
        "drive_intensity_psd_photons2_per_s2_hz": drive_psd(params),
        "drive_displacement_psd_m2_per_hz": s_drive_x,
        "shot_floor_psd_m2_per_hz": s_shot,
        "shot_floor_asd_m_per_rthz": params.beams.effective_floor,
        "drive_over_thermal_db": db(s_drive_x, s_thermal),
        "shot_over_thermal_db": db(s_shot, s_thermal),
        "shot_over_drive_db": db(s_shot, s_drive_x),
        "phase_transfer_abs_rad_per_m": float(abs(phase_transfer(params.cavity, fc))),
        "thermal_coloring": "exact" if near_resonance(params) else "flat",
    }
