"""Run configuration: a strict JSON document mirroring ExperimentParams.

Example::

    {
      "schema_version": 1,
      "seed": 0,
      "drive_ratio": 25.0,
      "oscillator": {"resonance_freq": 1.125e6, "mass": 5e-4, "quality_factor": 5e5},
      "options": {"runs": 500, "mode": "moments"}
    }

Omitted keys take the default (experimental) values.  A manifest written
by the CLI is also accepted: its ``config`` block is used.
"""

from __future__ import annotations

import dataclasses
import json
import os
from dataclasses import dataclass, field
from pathlib import Path

from .estimators import MODES
from .physics import BeamConfig, ExperimentParams, MechanicalOscillator, OpticalCavity

SCHEMA_VERSION = 1
OUTPUT_ENV = "OPTOCORR_OUT"

_SECTIONS = {
    "oscillator": MechanicalOscillator,
    "cavity": OpticalCavity,
    "beams": BeamConfig,
}
_TOP = {f.name for f in dataclasses.fields(ExperimentParams)} - set(_SECTIONS)
_OPTIONS = {"runs": 500, "mode": "moments", "plot": False, "workers": 1}


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    params: ExperimentParams = field(default_factory=ExperimentParams)
    runs: int = 500
    mode: str = "moments"
    plot: bool = False
    workers: int = 1
    overrides: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        d = params_to_dict(self.params)
        d["schema_version"] = SCHEMA_VERSION
        d["options"] = {"runs": self.runs, "mode": self.mode, "plot": self.plot, "workers": self.workers}
        return d

    def data_dict(self) -> dict:
        # the parts that determine data files; plot/workers do not
        d = self.to_dict()
        d["options"] = {"runs": self.runs, "mode": self.mode}
        return d


def params_to_dict(params: ExperimentParams) -> dict:
    return dataclasses.asdict(params)


def _number(path, value, integer=False, nullable=False):
    if value is None and nullable:
        return None
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{path}: expected a number, got {value!r}")
    if integer:
        if isinstance(value, float) and not value.is_integer():
            raise ConfigError(f"{path}: expected an integer, got {value!r}")
        return int(value)
    return float(value)


def _check_keys(path, doc, allowed):
    if not isinstance(doc, dict):
        raise ConfigError(f"{path or '<root>'}: expected an object")
    unknown = sorted(set(doc) - set(allowed))
    if unknown:
        where = f"{path}." if path else ""
        raise ConfigError(f"unknown config key(s): {', '.join(where + k for k in unknown)}")


def params_from_dict(doc: dict) -> ExperimentParams:
    """Build ExperimentParams from a (possibly partial) config document."""
    _check_keys("", doc, _TOP | set(_SECTIONS) | {"schema_version", "options"})
    kwargs = {}
    for name, cls in _SECTIONS.items():
        sub = doc.get(name, {})
        _check_keys(name, sub, {f.name for f in dataclasses.fields(cls)})
        try:
            kwargs[name] = cls(**{k: _number(f"{name}.{k}", v) for k, v in sub.items()})
        except ValueError as exc:
            raise ConfigError(f"{name}: {exc}") from exc
    for key in _TOP & set(doc):
        kwargs[key] = _number(key, doc[key], integer=(key == "seed"), nullable=(key == "sample_rate"))
    try:
        return ExperimentParams(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc


def config_from_dict(doc: dict, overrides=()) -> RunConfig:
    version = doc.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        raise ConfigError(f"schema_version: unsupported version {version!r}")
    options = doc.get("options", {})
    _check_keys("options", options, _OPTIONS)
    opts = {**_OPTIONS, **options}
    runs = _number("options.runs", opts["runs"], integer=True)
    if runs < 1:
        raise ConfigError("options.runs: must be at least 1")
    if opts["mode"] not in MODES:
        raise ConfigError(f"options.mode: must be one of {MODES}, got {opts['mode']!r}")
    if not isinstance(opts["plot"], bool):
        raise ConfigError("options.plot: expected true or false")
    workers = _number("options.workers", opts["workers"], integer=True)
    return RunConfig(params_from_dict(doc), runs, opts["mode"], opts["plot"], workers, tuple(overrides))


def parse_override(text: str) -> tuple[list[str], object]:
    """``a.b=value`` -> (["a", "b"], value); value is JSON if it parses."""
    key, sep, raw = text.partition("=")
    if not sep or not key.strip():
        raise ConfigError(f"--set expects key=value, got {text!r}")
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    return key.strip().split("."), value


def apply_overrides(doc: dict, overrides) -> dict:
    doc = json.loads(json.dumps(doc))
    for text in overrides:
        path, value = parse_override(text)
        target = doc
        for part in path[:-1]:
            target = target.setdefault(part, {})
            if not isinstance(target, dict):
                raise ConfigError(f"--set {text}: {part} is not a section")
        target[path[-1]] = value
    return doc


def read_config_file(path) -> dict:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"{path}: cannot read config ({exc.strerror})") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from exc
    if isinstance(doc, dict) and doc.get("kind") == "manifest":
        doc = doc["config"]
    return doc


def load_config(path=None, overrides=()) -> RunConfig:
    doc = read_config_file(path) if path else {}
    return config_from_dict(apply_overrides(doc, overrides), overrides)


def default_output(command: str) -> Path:
    return Path(os.environ.get(OUTPUT_ENV, "optocorr-output")) / command
