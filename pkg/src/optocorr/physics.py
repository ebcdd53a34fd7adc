"""Physical parameters and frequency-domain transfer functions.

Frequencies are in Hz throughout the public API; angular frequencies are
formed internally.  Incident intensity fluctuations are photon fluxes
(photons/s), so ``hbar * 8F/lambda * dI`` is a radiation-pressure force in
newtons.
"""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy import constants

HBAR = constants.hbar
K_B = constants.k
C_LIGHT = constants.c

TWO_PI = 2.0 * np.pi


@dataclass(frozen=True)
class MechanicalOscillator:
    resonance_freq: float = 1.125e6
    mass: float = 500e-6
    quality_factor: float = 5e5

    def __post_init__(self):
        for name in ("resonance_freq", "mass", "quality_factor"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    @property
    def linewidth(self) -> float:
        """Full width of the mechanical resonance, in Hz."""
        return self.resonance_freq / self.quality_factor

    @property
    def angular_freq(self) -> float:
        return TWO_PI * self.resonance_freq


@dataclass(frozen=True)
class OpticalCavity:
    finesse: float = 330_000.0
    wavelength: float = 810e-9
    bandwidth_freq: float = 700e3

    def __post_init__(self):
        for name in ("finesse", "wavelength", "bandwidth_freq"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive, got {getattr(self, name)!r}")

    def reduced_freq(self, freq):
        return np.asarray(freq, dtype=float) / self.bandwidth_freq


@dataclass(frozen=True)
class BeamConfig:
    """Incident beam powers and the meter's displacement sensitivity.

    ``shot_noise_floor`` is the shot-noise-limited displacement sensitivity
    (m/sqrt(Hz)) measured at ``floor_reference_power`` of meter light.  The
    floor actually seen by a run scales as ``sqrt(floor_reference_power /
    meter_power)``; set ``floor_reference_power`` to 0 to use the floor as is.
    """

    signal_power: float = 150e-6
    meter_power: float = 500e-6
    shot_noise_floor: float = 2.7e-20
    floor_reference_power: float = 50e-6

    def __post_init__(self):
        for name in ("signal_power", "meter_power", "shot_noise_floor", "floor_reference_power"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)!r}")
        if self.shot_noise_floor > 0 and self.floor_reference_power > 0 and self.meter_power == 0:
            raise ValueError("meter_power must be positive to scale the shot-noise floor")

    @property
    def effective_floor(self) -> float:
        """Displacement ASD of the meter readout at ``meter_power``."""
        if self.shot_noise_floor == 0 or self.floor_reference_power == 0:
            return self.shot_noise_floor
        return self.shot_noise_floor * np.sqrt(self.floor_reference_power / self.meter_power)


@dataclass(frozen=True)
class ExperimentParams:
    """Full configuration of one simulated acquisition.

    ``drive_ratio`` is the target S_rad/S_T at ``center_freq``.  When
    ``sample_rate`` is None the envelopes are sampled at ten times the
    analysis bandwidth.  ``drive_bandwidth`` is the two-sided width over
    which the drive (and the broadband thermal and shot noise) are
    synthesised; the acquisition then narrows every channel to
    ``analysis_bandwidth``.
    """

    oscillator: MechanicalOscillator = field(default_factory=MechanicalOscillator)
    cavity: OpticalCavity = field(default_factory=OpticalCavity)
    beams: BeamConfig = field(default_factory=BeamConfig)
    temperature: float = 300.0
    center_freq: float = 1.123e6
    analysis_bandwidth: float = 400.0
    run_duration: float = 0.2
    drive_ratio: float = 25.0
    drive_bandwidth: float = 1000.0
    sample_rate: float | None = None
    seed: int = 0

    def __post_init__(self):
        if not self.analysis_bandwidth > 0:
            raise ValueError("analysis_bandwidth must be positive")
        if not self.run_duration > 0:
            raise ValueError("run_duration must be positive")
        if not self.temperature >= 0:
            raise ValueError("temperature must be non-negative")
        if not self.drive_ratio >= 0:
            raise ValueError("drive_ratio must be non-negative")
        if not self.drive_bandwidth > 0:
            raise ValueError("drive_bandwidth must be positive")
        fs = self.envelope_rate
        if self.analysis_bandwidth > fs or self.drive_bandwidth > fs:
            raise ValueError(
                f"sample_rate {fs} Hz cannot hold analysis/drive bandwidths "
                f"{self.analysis_bandwidth}/{self.drive_bandwidth} Hz"
            )
        # the synthesised band must stay at positive optical sideband frequencies
        if not self.center_freq > max(self.drive_bandwidth, self.analysis_bandwidth) / 2:
            raise ValueError("center_freq must exceed half the synthesis bandwidth")
        if self.n_samples < 2:
            raise ValueError("run_duration * sample_rate must give at least 2 samples")

    @property
    def envelope_rate(self) -> float:
        if self.sample_rate is None:
            return 10.0 * self.analysis_bandwidth
        return float(self.sample_rate)

    @property
    def n_samples(self) -> int:
        return int(round(self.envelope_rate * self.run_duration))

    def replace(self, **changes) -> "ExperimentParams":
        return dataclasses.replace(self, **changes)


def susceptibility(osc: MechanicalOscillator, freq):
    """Viscously damped single-mode susceptibility chi[Omega], in m/N.

    chi = 1 / (M (Omega_M^2 - Omega^2 - i Omega Omega_M / Q)).  Accepts
    scalars or arrays; negative frequencies return the conjugate of the
    positive-frequency value.
    """
    w = TWO_PI * np.asarray(freq, dtype=float)
    wm = osc.angular_freq
    return 1.0 / (osc.mass * (wm**2 - w**2 - 1j * w * wm / osc.quality_factor))


def intensity_reflection(cavity: OpticalCavity, freq):
    """All-pass reflection (1 + i w) / (1 - i w) of intensity fluctuations."""
    w = cavity.reduced_freq(freq)
    return (1.0 + 1j * w) / (1.0 - 1j * w)


def cavity_factor(cavity: OpticalCavity, freq):
    # shared by the meter phase readout and the radiation-pressure force
    w = cavity.reduced_freq(freq)
    return 8.0 * cavity.finesse / (cavity.wavelength * (1.0 - 1j * w))


def phase_transfer(cavity: OpticalCavity, freq):
    """Meter phase per unit mirror displacement, rad/m."""
    return cavity_factor(cavity, freq)


def radiation_displacement_transfer(params: ExperimentParams, freq):
    """Mirror displacement per unit incident photon-flux fluctuation, m/(photons/s)."""
    return cavity_factor(params.cavity, freq) * HBAR * susceptibility(params.oscillator, freq)


def photon_flux(power: float, wavelength: float) -> float:
    """Convert an optical power in W to photons/s."""
    return power * wavelength / (TWO_PI * HBAR * C_LIGHT)


# Reference point of the scaling law: F, lambda, P_in, M, Q, f_M, T
_RATIO_REFERENCE = (300_000.0, 800e-9, 1e-3, 1e-6, 1e6, 1e6, 1.0)


def rad_thermal_ratio(params: ExperimentParams, power: float | None = None) -> float:
    """Quantum radiation-pressure to thermal noise ratio from the scaling law.

    Evaluates ``2.3 (F/3e5)^2 (800nm/lambda) (P/1mW) (1mg/M) (Q/1e6)
    (1MHz/f_M) (1K/T)``.  ``power`` defaults to the signal beam power.
    """
    if power is None:
        power = params.beams.signal_power
    F0, lam0, P0, M0, Q0, f0, T0 = _RATIO_REFERENCE
    osc, cav = params.oscillator, params.cavity
    if params.temperature <= 0 or power <= 0:
        raise ValueError("temperature and power must be positive")
    return (
        2.3
        * (cav.finesse / F0) ** 2
        * (lam0 / cav.wavelength)
        * (power / P0)
        * (M0 / osc.mass)
        * (osc.quality_factor / Q0)
        * (f0 / osc.resonance_freq)
        * (T0 / params.temperature)
    )


def quantum_rad_thermal_ratio(params: ExperimentParams, power: float | None = None) -> float:
    """Same ratio computed from first principles at zero frequency.

    Shot-noise photon-flux PSD 2*Phi pushed through ``hbar * 8F/lambda * chi``
    against the fluctuation-dissipation thermal spectrum.  Independent of the
    rounded 2.3 prefactor; used to cross-check it.
    """
    if power is None:
        power = params.beams.signal_power
    osc, cav = params.oscillator, params.cavity
    flux = photon_flux(power, cav.wavelength)
    force_psd = (HBAR * 8.0 * cav.finesse / cav.wavelength) ** 2 * 2.0 * flux
    # S_T / |chi|^2 = 4 k T M Omega_M / Q for the viscous model
    thermal_force_psd = 4.0 * K_B * params.temperature * osc.mass * osc.angular_freq / osc.quality_factor
    return force_psd / thermal_force_psd
