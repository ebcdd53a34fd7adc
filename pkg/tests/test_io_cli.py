import dataclasses
import json

import numpy as np
import pytest

from optocorr import io
from optocorr.cli import main
from optocorr.config import (
    OUTPUT_ENV,
    ConfigError,
    RunConfig,
    config_from_dict,
    load_config,
    params_from_dict,
)
from optocorr.engine import RunRecord, calibrate_meter, run_experiment
from optocorr.estimators import correlation_coefficient, histogram_pair
from optocorr.noise import NoiseSpec, gen_band_limited_gaussian

REFERENCE = [
    "--set", "cavity.finesse=300000",
    "--set", "cavity.wavelength=800e-9",
    "--set", "beams.signal_power=1e-3",
    "--set", "oscillator.mass=1e-6",
    "--set", "oscillator.quality_factor=1e6",
    "--set", "oscillator.resonance_freq=1e6",
    "--set", "temperature=1",
]


def printed_ratio(capsys):
    line = capsys.readouterr().out.splitlines()[0]
    assert line.startswith("rad_thermal_ratio = ")
    return float(line.split("=")[1])


def data_files(directory):
    return {p.name: p.read_bytes() for p in sorted(directory.iterdir()) if p.suffix in (".csv", ".json") and p.name != "manifest.json"}


# ---------------------------------------------------------------- file formats


def test_envelope_roundtrip(tmp_path):
    spec = NoiseSpec(400.0, 3.0, 5, 0.2, 4000.0, center_freq=1.123e6, unit="rad")
    env = gen_band_limited_gaussian(spec)
    csv_path = io.write_envelope(env, tmp_path / "noise", {"seed": spec.seed, "noise_spec": dataclasses.asdict(spec)})
    back = io.read_envelope(csv_path)
    assert back.samples.tobytes() == env.samples.tobytes()
    assert (back.sample_rate, back.center_freq, back.unit) == (4000.0, 1.123e6, "rad")
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "# seed=5"
    assert lines[1] == ",".join(io.ENVELOPE_COLUMNS)
    sidecar = io.read_json(tmp_path / "noise.json")
    assert sidecar["noise_spec"]["target_psd"] == 3.0
    assert sidecar["seed"] == 5


def test_bad_envelope_header(tmp_path):
    (tmp_path / "x.csv").write_text("a,b,c\n1,2,3\n")
    with pytest.raises(ValueError):
        io.read_envelope(tmp_path / "x.csv")


def test_run_roundtrip(tmp_path, setup):
    rec = calibrate_meter(run_experiment(setup, 2))
    io.write_run(rec, tmp_path)
    io.write_json(tmp_path / "manifest.json", {"seed": 2, "config": RunConfig(setup).to_dict(), "calibration": rec.calibration.to_dict()})
    back = io.read_run(tmp_path)
    assert back.seed == 2
    assert back.params == setup
    assert back.calibration == rec.calibration
    for name in io.RUN_CHANNELS:
        assert getattr(back, name).samples.tobytes() == getattr(rec, name).samples.tobytes()


# ---------------------------------------------------------------- config


def test_defaults_are_experimental(setup):
    cfg = load_config()
    assert cfg.params == setup
    p = cfg.params
    assert (p.cavity.finesse, p.cavity.wavelength, p.cavity.bandwidth_freq) == (330000, 810e-9, 700e3)
    assert (p.oscillator.resonance_freq, p.oscillator.mass, p.oscillator.quality_factor) == (1.125e6, 500e-6, 5e5)
    assert (p.temperature, p.center_freq, p.analysis_bandwidth, p.run_duration) == (300, 1.123e6, 400, 0.2)
    assert (p.beams.signal_power, p.beams.meter_power, p.beams.shot_noise_floor) == (150e-6, 500e-6, 2.7e-20)
    assert p.drive_ratio == 25


@pytest.mark.parametrize(
    "doc, fragment",
    [
        ({"bogus": 1}, "bogus"),
        ({"cavity": {"finess": 1}}, "cavity.finess"),
        ({"options": {"run": 3}}, "options.run"),
        ({"temperature": "hot"}, "temperature"),
        ({"seed": 1.5}, "seed"),
        ({"schema_version": 9}, "schema_version"),
        ({"options": {"mode": "median"}}, "options.mode"),
        ({"oscillator": {"mass": -1}}, "mass"),
    ],
)
def test_strict_schema(doc, fragment):
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        config_from_dict(doc)


def test_parse_error_has_location(tmp_path):
    path = tmp_path / "c.json"
    path.write_text('{\n  "seed": 1,\n  "drive_ratio": ,\n}')
    with pytest.raises(ConfigError, match=r"c\.json:3:\d+"):
        load_config(path)


def test_overrides_and_manifest_as_config(tmp_path):
    cfg = load_config(None, ["drive_ratio=0.03", "oscillator.mass=1e-3", 'options.mode="per-run"'])
    assert cfg.params.drive_ratio == 0.03 and cfg.params.oscillator.mass == 1e-3 and cfg.mode == "per-run"
    io.write_json(tmp_path / "manifest.json", {"kind": "manifest", "config": cfg.to_dict()})
    again = load_config(tmp_path / "manifest.json")
    assert again.params == cfg.params and again.mode == "per-run"
    with pytest.raises(ConfigError):
        load_config(None, ["novalue"])


def test_params_dict_roundtrip(setup):
    assert params_from_dict(RunConfig(setup).to_dict()) == setup


# ---------------------------------------------------------------- CLI


def test_ratio_reference(capsys):
    assert main(["ratio", *REFERENCE]) == 0
    assert printed_ratio(capsys) == pytest.approx(2.3, abs=0.01)


def test_ratio_temperature_halves(capsys):
    main(["ratio"])
    base = printed_ratio(capsys)
    main(["ratio", "--set", "temperature=600"])
    assert printed_ratio(capsys) == pytest.approx(base / 2, rel=1e-5)


def test_ratio_setup_golden(capsys):
    # direct substitution of the default setup at 300 K
    main(["ratio"])
    assert printed_ratio(capsys) == pytest.approx(3.6648559670781893e-4 / 300, rel=1e-5)


def test_ratio_writes_budget(tmp_path):
    assert main(["ratio", "--out", str(tmp_path)]) == 0
    budget = io.read_json(tmp_path / "budget.json")
    assert "shot_over_thermal_db" in budget and "config_digest" in budget


def test_simulate_creates_dir_and_is_deterministic(tmp_path, capsys):
    a, b = tmp_path / "deep" / "a", tmp_path / "b"
    assert main(["simulate", "--out", str(a), "--seed", "4"]) == 0
    assert main(["simulate", "--out", str(b), "--seed", "4"]) == 0
    assert data_files(a) == data_files(b)
    manifest = io.read_json(a / "manifest.json")
    assert manifest["seed"] == 4 and manifest["schema_version"] == 1
    assert manifest["files"]["signal_out.csv"] == io.file_digest(a / "signal_out.csv")
    c = float(capsys.readouterr().out.split()[2])
    assert 0.93 <= c <= 0.99


def test_correlate_matches_library(tmp_path):
    run = tmp_path / "run"
    main(["simulate", "--out", str(run), "--seed", "8"])
    assert main(["correlate", str(run)]) == 0
    report = io.read_json(run / "correlate" / "correlation.json")
    rec = calibrate_meter(run_experiment(load_config().params, 8))
    lib = correlation_coefficient(rec.signal_out, rec.meter_out)
    assert report["coefficient"] == lib.coefficient
    assert report["conditional_dispersion_ratio"] == lib.conditional_dispersion_ratio
    assert report["seed"] == 8
    _, _, summary = histogram_pair(rec.signal_out, rec.meter_out)
    assert report["histograms"] == summary
    header = (run / "correlate" / "hist_signal.csv").read_text().splitlines()
    assert header[0].startswith("# config_digest=") and header[2] == "bin_x_center,bin_y_center,probability"


def _write_custom_run(directory, signal, meter, setup):
    rec = RunRecord(signal, meter, meter, 0, setup)
    io.write_run(rec, directory)
    io.write_json(directory / "manifest.json", {"kind": "manifest", "seed": 0, "config": RunConfig(setup).to_dict()})


def test_correlate_self_correlated(tmp_path, setup):
    env = run_experiment(setup, 0).signal_out
    _write_custom_run(tmp_path, env, env.with_samples(env.samples, unit="rad"), setup)
    assert main(["correlate", str(tmp_path), "--out", str(tmp_path / "c")]) == 0
    assert io.read_json(tmp_path / "c" / "correlation.json")["coefficient"] == pytest.approx(1.0, abs=1e-12)


def test_correlate_degenerate_exit_code(tmp_path, setup):
    env = run_experiment(setup, 0).signal_out
    _write_custom_run(tmp_path, env, env.with_samples(np.zeros(len(env))), setup)
    assert main(["correlate", str(tmp_path)]) == 3


def test_exit_codes(tmp_path):
    assert main(["sweep", "--set", "bogus=1", "--out", str(tmp_path)]) == 2
    (tmp_path / "bad.json").write_text("{")
    assert main(["simulate", "--config", str(tmp_path / "bad.json")]) == 2
    assert main(["correlate", str(tmp_path / "missing")]) == 4
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 2


def test_sweep_single_run_matches_correlate(tmp_path):
    main(["simulate", "--out", str(tmp_path / "run"), "--seed", "3"])
    main(["correlate", str(tmp_path / "run")])
    main(["sweep", "--runs", "1", "--seed", "3", "--out", str(tmp_path / "sw")])
    c = io.read_json(tmp_path / "run" / "correlate" / "correlation.json")["coefficient"]
    trace = io.read_json(tmp_path / "sw" / "sweep.json")
    assert trace["final_estimate"] == pytest.approx(c, rel=1e-14)
    assert trace["per_run"][0] == pytest.approx(c, rel=1e-14)


def test_sweep_outputs(tmp_path):
    assert main(["sweep", "--runs", "30", "--mode", "per-run", "--out", str(tmp_path)]) == 0
    trace = io.read_json(tmp_path / "sweep.json")
    assert trace["mode"] == "per-run" and len(trace["estimate"]) == 30
    assert np.all(np.diff(trace["halfwidth"]) < 0)
    rows = (tmp_path / "sweep.csv").read_text().splitlines()
    assert rows[2].startswith("n_runs,") and len(rows) == 33


def test_default_output_root(tmp_path, monkeypatch):
    monkeypatch.setenv(OUTPUT_ENV, str(tmp_path / "root"))
    assert main(["simulate"]) == 0
    assert (tmp_path / "root" / "simulate" / "signal_out.csv").exists()


def test_plots(tmp_path):
    main(["simulate", "--out", str(tmp_path / "r"), "--plot"])
    main(["correlate", str(tmp_path / "r"), "--plot"])
    main(["sweep", "--runs", "5", "--out", str(tmp_path / "s"), "--plot"])
    for path in (tmp_path / "r" / "phase_space.png", tmp_path / "r" / "correlate" / "histograms.png", tmp_path / "s" / "sweep.png"):
        assert path.read_bytes()[:4] == b"\x89PNG"


@pytest.mark.parametrize("command", ["ratio", "simulate", "correlate", "sweep"])
def test_rerun_from_manifest(tmp_path, command):
    first = tmp_path / "first"
    run = tmp_path / "run"
    if command == "correlate":
        main(["simulate", "--out", str(run), "--seed", "6"])
        main(["correlate", str(run), "--out", str(first), "--set", "drive_ratio=25"])
    else:
        main([command, "--out", str(first), "--seed", "6", "--runs" if command == "sweep" else "--set",
              "20" if command == "sweep" else "drive_ratio=9"])
    second = tmp_path / "second"
    assert main([command, "--config", str(first / "manifest.json"), "--out", str(second)]) == 0
    assert data_files(first) and data_files(first) == data_files(second)
    assert json.loads((first / "manifest.json").read_text())["config_digest"] == json.loads(
        (second / "manifest.json").read_text()
    )["config_digest"]
