"""Command line interface: ``optocorr {ratio,simulate,correlate,sweep}``.

Every data-producing command writes a ``manifest.json`` next to its files.
Passing that manifest back as ``--config`` reproduces the data files byte
for byte.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import __version__, io
from .config import ConfigError, RunConfig, default_output, load_config
from .engine import calibrate_meter, run_experiment, run_sweep
from .estimators import (
    MODES,
    DegenerateDataError,
    correlation_coefficient,
    expected_coefficient,
    histogram_pair,
    sweep_correlation,
)
from .noise import noise_budget
from .physics import quantum_rad_thermal_ratio, rad_thermal_ratio

EXIT_OK, EXIT_CONFIG, EXIT_DEGENERATE, EXIT_IO = 0, 2, 3, 4

ACQUISITION_NOTE = "brick-wall at +/-analysis_bandwidth/2, half-power edge bins"


def _manifest(cfg: RunConfig, command: str, seed: int, out: Path, files, **extra) -> dict:
    return {
        "kind": "manifest",
        "schema_version": io.SCHEMA_VERSION,
        "command": command,
        "version": __version__,
        "seed": seed,
        "config_digest": io.digest(cfg.data_dict()),
        "config": cfg.to_dict(),
        "overrides": list(cfg.overrides),
        "files": {Path(f).name: io.file_digest(f) for f in files},
        **extra,
    }


def _out_dir(args, command) -> Path:
    out = Path(args.out) if args.out else default_output(command)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _stamp(cfg: RunConfig, seed: int) -> dict:
    return {"seed": seed, "config_digest": io.digest(cfg.data_dict())}


def cmd_ratio(cfg: RunConfig, args) -> int:
    p = cfg.params
    budget = {
        "rad_thermal_ratio": rad_thermal_ratio(p),
        "rad_thermal_ratio_first_principles": quantum_rad_thermal_ratio(p),
        **noise_budget(p),
    }
    print(f"rad_thermal_ratio = {budget['rad_thermal_ratio']:.6g}")
    for key, value in budget.items():
        if key == "rad_thermal_ratio":
            continue
        shown = f"{value:.6g}" if isinstance(value, float) else value
        print(f"  {key} = {shown}")
    if args.out:
        out = _out_dir(args, "ratio")
        path = out / "budget.json"
        io.write_json(path, {**_stamp(cfg, p.seed), **budget})
        io.write_json(out / "manifest.json", _manifest(cfg, "ratio", p.seed, out, [path]))
    return EXIT_OK


def cmd_simulate(cfg: RunConfig, args) -> int:
    p = cfg.params
    record = calibrate_meter(run_experiment(p, p.seed))
    out = _out_dir(args, "simulate")
    meta = {**_stamp(cfg, p.seed), "source": "run_experiment", "acquisition_filter": ACQUISITION_NOTE}
    files = io.write_run(record, out, meta)
    files += [f.with_suffix(".json") for f in files]
    report = correlation_coefficient(record.signal_out, record.meter_out)
    io.write_json(
        out / "manifest.json",
        _manifest(
            cfg, "simulate", p.seed, out, files,
            calibration=record.calibration.to_dict(),
            analysis_bandwidth_hz=p.analysis_bandwidth,
            acquisition_filter=ACQUISITION_NOTE,
        ),
    )
    if cfg.plot:
        from .plotting import plot_phase_space

        plot_phase_space(record, out / "phase_space.png")
    print(f"C = {report.coefficient:.6f}  ({len(record.signal_out)} samples) -> {out}")
    return EXIT_OK


def cmd_correlate(cfg: RunConfig, args) -> int:
    run_dir = args.run_dir
    if run_dir is None and args.config:
        run_dir = io.read_json(args.config).get("inputs", {}).get("run_dir")
    if run_dir is None:
        raise ConfigError("correlate needs a run directory")
    run_dir = Path(run_dir)
    record = io.read_run(run_dir)
    seed = record.seed
    report = correlation_coefficient(record.signal_out, record.meter_out)
    raw, cond, summary = histogram_pair(record.signal_out, record.meter_out)

    out = Path(args.out) if args.out else run_dir / "correlate"
    out.mkdir(parents=True, exist_ok=True)
    stamp = _stamp(cfg, seed)
    report_path = out / "correlation.json"
    io.write_json(report_path, {**stamp, **report.to_dict(), "histograms": summary})
    io.write_histogram(raw, out / "hist_signal.csv", stamp)
    io.write_histogram(cond, out / "hist_conditional.csv", stamp)
    files = [report_path, out / "hist_signal.csv", out / "hist_conditional.csv"]
    inputs = {
        "run_dir": str(run_dir),
        "files": {f"{c}.csv": io.file_digest(run_dir / f"{c}.csv") for c in io.RUN_CHANNELS},
    }
    io.write_json(out / "manifest.json", _manifest(cfg, "correlate", seed, out, files, inputs=inputs))
    if cfg.plot:
        from .plotting import plot_histograms

        plot_histograms(raw, cond, out / "histograms.png")
    print(
        f"C = {report.coefficient:.6f}  dispersion ratio = {report.conditional_dispersion_ratio:.4f}"
        f"  peak density ratio = {summary['peak_density_ratio']:.3g} -> {out}"
    )
    return EXIT_OK


def cmd_sweep(cfg: RunConfig, args) -> int:
    p = cfg.params
    records = run_sweep(p, cfg.runs, p.seed, workers=cfg.workers)
    trace = sweep_correlation(records, cfg.mode, expected_coefficient(p.drive_ratio))
    out = _out_dir(args, "sweep")
    stamp = _stamp(cfg, p.seed)
    json_path, csv_path = out / "sweep.json", out / "sweep.csv"
    io.write_json(json_path, {**stamp, "seeds": [p.seed, p.seed + cfg.runs - 1], **trace.to_dict()})
    io.write_sweep_csv(trace, csv_path, stamp)
    io.write_json(out / "manifest.json", _manifest(cfg, "sweep", p.seed, out, [json_path, csv_path]))
    if cfg.plot:
        from .plotting import plot_sweep

        plot_sweep(trace, out / "sweep.png")
    print(
        f"N = {cfg.runs}  C[{cfg.mode}] = {trace.final:.5f} +/- {trace.halfwidth[-1]:.2g}"
        f"  (moments {trace.estimate_moments[-1]:.5f}, per-run {trace.estimate_per_run[-1]:.5f},"
        f" expected {trace.expected:.5f}) -> {out}"
    )
    return EXIT_OK


COMMANDS = {
    "ratio": cmd_ratio,
    "simulate": cmd_simulate,
    "correlate": cmd_correlate,
    "sweep": cmd_sweep,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="optocorr",
        description="Simulate dual-beam optomechanical correlation experiments.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", metavar="PATH", help="JSON config or a previous manifest.json")
    common.add_argument("--seed", type=int, help="base random seed")
    common.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override one config key, e.g. --set oscillator.mass=1e-6 (repeatable)",
    )
    common.add_argument("--out", metavar="DIR", help="output directory")
    common.add_argument("--plot", action="store_true", default=None, help="also render a figure")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("ratio", parents=[common], help="print the noise budget")
    sub.add_parser("simulate", parents=[common], help="simulate and store one calibrated run")
    p_corr = sub.add_parser("correlate", parents=[common], help="correlate a stored run")
    p_corr.add_argument("run_dir", nargs="?", help="directory written by simulate")
    p_sweep = sub.add_parser("sweep", parents=[common], help="average C over many runs")
    p_sweep.add_argument("--runs", type=int, help="number of runs")
    p_sweep.add_argument("--mode", choices=MODES, help="accumulation mode")
    return parser


def _overrides(args) -> list[str]:
    overrides = list(args.overrides)
    if args.seed is not None:
        overrides.append(f"seed={args.seed}")
    if getattr(args, "runs", None) is not None:
        overrides.append(f"options.runs={args.runs}")
    if getattr(args, "mode", None) is not None:
        overrides.append(f'options.mode="{args.mode}"')
    if args.plot:
        overrides.append("options.plot=true")
    return overrides


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        stored = Path(getattr(args, "run_dir", None) or "") / "manifest.json"
        if args.command == "correlate" and args.config is None and args.run_dir and stored.is_file():
            # a stored run carries its own configuration
            args.config = str(stored)
        cfg = load_config(args.config, _overrides(args))
        return COMMANDS[args.command](cfg, args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DegenerateDataError as exc:
        print(f"degenerate data: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
