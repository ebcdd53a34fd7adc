"""Figure rendering for the report paths of the CLI.

Only used when plots are requested; data files never depend on it.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.linewidth": 0.8,
    "lines.linewidth": 1.0,
    "savefig.dpi": 150,
}

# strip the matplotlib version stamp so reruns give identical images
_METADATA = {"Software": None}


def figure(ncols=1, width=3.4, aspect=0.8):
    with plt.rc_context(STYLE):
        fig, axes = plt.subplots(1, ncols, figsize=(width * ncols, width * aspect), squeeze=False)
    return fig, axes[0]


def save(fig, path):
    with plt.rc_context(STYLE):
        fig.tight_layout()
        fig.savefig(path, metadata=_METADATA)
    plt.close(fig)
    return path


def plot_phase_space(record, path):
    """Signal intensity and calibrated meter displacement trajectories side by side."""
    fig, (ax_s, ax_m) = figure(2)
    s = record.signal_out.samples
    m = record.meter_displacement.samples
    ax_s.plot(s.real, s.imag, color="C0")
    ax_s.set_xlabel(r"$X_{I_s}$ (photons/s)")
    ax_s.set_ylabel(r"$Y_{I_s}$ (photons/s)")
    ax_m.plot(m.real, m.imag, color="C3")
    ax_m.set_xlabel(r"$X_{\varphi_m}$ (m)")
    ax_m.set_ylabel(r"$Y_{\varphi_m}$ (m)")
    for ax in (ax_s, ax_m):
        ax.set_aspect("equal", adjustable="datalim")
        ax.ticklabel_format(style="sci", scilimits=(-2, 2))
    return save(fig, path)


def plot_histograms(raw, conditional, path):
    """Raw and conditional phase-space densities on their shared grid."""
    fig, axes = figure(2)
    edges = raw.grid.edges
    for ax, hist, title in zip(axes, (raw, conditional), ("raw", "conditional")):
        mesh = ax.pcolormesh(edges, edges, hist.density.T, shading="flat", cmap="viridis")
        fig.colorbar(mesh, ax=ax, fraction=0.046)
        ax.set_title(f"{title}, peak {hist.peak_density:.3g}")
        ax.set_aspect("equal")
        ax.set_xlabel("X")
    axes[0].set_ylabel("Y")
    return save(fig, path)


def plot_sweep(trace, path):
    fig, (ax,) = figure(1, width=4.0, aspect=0.65)
    n = trace.n_runs
    ax.plot(n, trace.estimate, color="k", label=trace.mode)
    if trace.expected is not None:
        centre = np.full(n.shape, trace.expected)
        ax.axhline(trace.expected, color="C0", lw=0.8)
        ax.plot(n, centre + trace.halfwidth, "--", color="C0")
        ax.plot(n, centre - trace.halfwidth, "--", color="C0")
    ax.set_xscale("log")
    ax.set_xlabel("N runs averaged")
    ax.set_ylabel(r"$C_{I_s,\varphi_m}$")
    ax.legend(frameon=False)
    return save(fig, path)
