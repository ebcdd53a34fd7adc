"""Correlation coefficient, conditional fluctuations, phase-space histograms
and multi-run averaging.

Brackets are plain temporal averages over all samples; envelopes are
zero-mean by construction, so no mean is removed.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass

import numpy as np

from .noise import ComplexEnvelope


class DegenerateDataError(ValueError):
    """Raised when a variance needed by an estimator is zero."""


def _samples(x) -> np.ndarray:
    if isinstance(x, ComplexEnvelope):
        return x.samples
    return np.asarray(x, dtype=complex)


def moments(signal, meter):
    """Return ``(<s m*>, <|s|^2>, <|m|^2>, n)`` for two equal-length records."""
    s, m = _samples(signal), _samples(meter)
    if s.shape != m.shape or s.ndim != 1:
        raise ValueError("signal and meter must be 1-D records of equal length")
    if s.size < 2:
        raise ValueError("need at least two samples")
    cross = complex(np.mean(s * m.conj()))
    vs = float(np.mean(s.real**2 + s.imag**2))
    vm = float(np.mean(m.real**2 + m.imag**2))
    return cross, vs, vm, s.size


@dataclass(frozen=True)
class CorrelationReport:
    coefficient: float
    signal_variance: float
    meter_variance: float
    cross_moment: complex
    n_samples: int
    conditional_dispersion_ratio: float

    @classmethod
    def from_moments(cls, cross, vs, vm, n) -> "CorrelationReport":
        if vs == 0 or vm == 0:
            raise DegenerateDataError("correlation undefined: a channel has zero variance")
        c = min(max(abs(cross) ** 2 / (vs * vm), 0.0), 1.0)
        return cls(c, vs, vm, complex(cross), int(n), float(np.sqrt(1.0 - c)))

    @property
    def conditional_variance(self) -> float:
        return self.signal_variance - abs(self.cross_moment) ** 2 / self.meter_variance

    def to_dict(self) -> dict:
        d = asdict(self)
        d["cross_moment"] = [self.cross_moment.real, self.cross_moment.imag]
        return d


def correlation_coefficient(signal, meter) -> CorrelationReport:
    """C = |<s m*>|^2 / (<|s|^2> <|m|^2>), with the conditional dispersion sqrt(1 - C)."""
    return CorrelationReport.from_moments(*moments(signal, meter))


def regression_gain(signal, meter) -> complex:
    cross, _, vm, _ = moments(signal, meter)
    if vm == 0:
        raise DegenerateDataError("meter channel has zero variance")
    return cross / vm


def conditional_fluctuations(signal, meter):
    """Residual of the signal after its best linear prediction from the meter.

    Returns an envelope when ``signal`` is one, otherwise an array.
    """
    s, m = _samples(signal), _samples(meter)
    residual = s - regression_gain(s, m) * m
    if isinstance(signal, ComplexEnvelope):
        return signal.with_samples(residual)
    return residual


# ---------------------------------------------------------------- histograms


@dataclass(frozen=True)
class HistogramGrid:
    """Square grid centred on the origin; ``bins`` odd so one bin sits on it."""

    half_width: float
    bins: int = 65

    def __post_init__(self):
        if not self.half_width > 0:
            raise ValueError("half_width must be positive")
        if self.bins < 1:
            raise ValueError("bins must be positive")

    @property
    def edges(self) -> np.ndarray:
        return np.linspace(-self.half_width, self.half_width, self.bins + 1)

    @property
    def bin_width(self) -> float:
        return 2 * self.half_width / self.bins

    @property
    def centers(self) -> np.ndarray:
        e = self.edges
        return 0.5 * (e[1:] + e[:-1])

    @classmethod
    def for_envelope(cls, env, n_sigma: float = 4.0, bins: int = 65) -> "HistogramGrid":
        """±``n_sigma`` per-quadrature standard deviations of ``env``."""
        s = _samples(env)
        sigma = np.sqrt(np.mean(np.abs(s) ** 2) / 2)
        return cls(n_sigma * sigma if sigma > 0 else 1.0, bins)


@dataclass(frozen=True, eq=False)
class PhaseSpaceHistogram:
    probability: np.ndarray  # [ix, iy]
    grid: HistogramGrid
    label: str = ""
    n_outside: int = 0

    @property
    def bin_width(self) -> float:
        return self.grid.bin_width

    @property
    def density(self) -> np.ndarray:
        return self.probability / self.bin_width**2

    @property
    def peak_density(self) -> float:
        return float(self.density.max())

    def rows(self):
        """Yield ``(x_center, y_center, probability)`` in x-major order."""
        c = self.grid.centers
        for i, x in enumerate(c):
            for j, y in enumerate(c):
                yield x, y, self.probability[i, j]


def histogram(env, grid: HistogramGrid | None = None, label: str = "") -> PhaseSpaceHistogram:
    """Normalized 2-D histogram of the (X, Y) samples.

    Probabilities are normalized over all samples, so mass falling outside
    the grid is lost from the total; it is counted in ``n_outside``.
    """
    s = _samples(env)
    if s.size == 0:
        raise ValueError("cannot histogram an empty envelope")
    grid = grid or HistogramGrid.for_envelope(s)
    counts, _, _ = np.histogram2d(s.real, s.imag, bins=[grid.edges, grid.edges])
    inside = int(counts.sum())
    return PhaseSpaceHistogram(counts / s.size, grid, label, s.size - inside)


def histogram_pair(signal, meter, bins: int = 65, n_sigma: float = 4.0):
    """Raw and conditional signal histograms on one shared grid.

    Returns ``(raw, conditional, summary)`` where ``summary`` holds the
    per-axis dispersion ratio and the peak-density ratio.
    """
    s = _samples(signal)
    cond = conditional_fluctuations(s, _samples(meter))
    grid = HistogramGrid.for_envelope(s, n_sigma, bins)
    raw_h = histogram(s, grid, "signal")
    cond_h = histogram(cond, grid, "conditional")
    summary = {
        "dispersion_ratio": float(np.sqrt(np.mean(np.abs(cond) ** 2) / np.mean(np.abs(s) ** 2))),
        "peak_density_ratio": cond_h.peak_density / raw_h.peak_density,
        "bins": grid.bins,
        "half_width": grid.half_width,
    }
    return raw_h, cond_h, summary


# ---------------------------------------------------------------- sweeps

MODES = ("moments", "per-run")

# number of leading runs used to measure the single-run spread
UNCERTAINTY_RUNS = 20


@dataclass(frozen=True, eq=False)
class SweepTrace:
    n_runs: np.ndarray
    estimate: np.ndarray
    estimate_moments: np.ndarray
    estimate_per_run: np.ndarray
    per_run: np.ndarray
    halfwidth: np.ndarray
    single_run_std: float
    expected: float | None
    mode: str

    @property
    def final(self) -> float:
        return float(self.estimate[-1])

    def to_dict(self) -> dict:
        return {
            "mode": self.mode,
            "expected": self.expected,
            "single_run_std": self.single_run_std,
            "final_estimate": self.final,
            "final_halfwidth": float(self.halfwidth[-1]),
            "n_runs": self.n_runs.tolist(),
            "estimate": self.estimate.tolist(),
            "estimate_moments": self.estimate_moments.tolist(),
            "estimate_per_run": self.estimate_per_run.tolist(),
            "per_run": self.per_run.tolist(),
            "halfwidth": self.halfwidth.tolist(),
        }


def expected_coefficient(drive_ratio: float) -> float:
    """(1 + S_T/S_rad)^-1 for a given S_rad/S_T."""
    return drive_ratio / (1.0 + drive_ratio)


def _record_channels(rec):
    if isinstance(rec, tuple):
        return rec
    return rec.signal_out, rec.meter_out


def sweep_correlation(records, mode: str = "moments", expected: float | None = None) -> SweepTrace:
    """Running estimate of C over the first N runs, N = 1..len(records).

    ``moments`` pools cross-moments and variances over runs before forming
    C; ``per-run`` averages the per-run coefficients, which is biased upward
    by roughly one over the number of independent samples per run.  Both are
    always computed; ``mode`` picks ``estimate``.  The band half-width is
    ``u1 / sqrt(N)`` with ``u1`` the spread of per-run coefficients over the
    first twenty runs.

    ``records`` may be :class:`RunRecord` objects or ``(signal, meter)``
    pairs.
    """
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    records = list(records)
    if not records:
        raise ValueError("need at least one record")

    m = np.array([moments(*_record_channels(r)) for r in records], dtype=object)
    cross = m[:, 0].astype(complex)
    vs = m[:, 1].astype(float)
    vm = m[:, 2].astype(float)
    n = m[:, 3].astype(float)
    if np.any(vs == 0) or np.any(vm == 0):
        raise DegenerateDataError("a run has a zero-variance channel")

    per_run = np.abs(cross) ** 2 / (vs * vm)
    # sample-weighted pooling, fixed reduction order
    cum_n = np.cumsum(n)
    pooled_cross = np.cumsum(cross * n) / cum_n
    pooled_vs = np.cumsum(vs * n) / cum_n
    pooled_vm = np.cumsum(vm * n) / cum_n
    est_moments = np.abs(pooled_cross) ** 2 / (pooled_vs * pooled_vm)
    counts = np.arange(1, len(records) + 1)
    est_per_run = np.cumsum(per_run) / counts

    head = per_run[: min(UNCERTAINTY_RUNS, len(per_run))]
    u1 = float(np.std(head, ddof=1)) if head.size > 1 else 0.0

    if expected is None and hasattr(records[0], "params"):
        expected = expected_coefficient(records[0].params.drive_ratio)

    return SweepTrace(
        n_runs=counts,
        estimate=est_moments if mode == "moments" else est_per_run,
        estimate_moments=est_moments,
        estimate_per_run=est_per_run,
        per_run=per_run,
        halfwidth=u1 / np.sqrt(counts),
        single_run_std=u1,
        expected=expected,
        mode=mode,
    )
