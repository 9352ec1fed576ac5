"""Run configuration: a YAML file merged with command-line overrides.

Example file::

    inputs:
      - path: dow.csv
        kind: prices          # or: returns
        label: DOW
        columns: {date: Date, price: Close}
    tail: both                # upper | lower | both
    schemes: [month, quarter, semester]
    k: [20]
    level: 0.95
    fraction: 0.10
    seed: 0
    min_edge_obs: 5
    optimizer: {n_restarts: 5}
    out: results
    formats: [csv, json]
    simulate:
      truth: {shape: 0.167, scale: 0.546, location: 1.411}
      n_maxima: 192
      replications: 500

Relative input paths resolve against the config file's directory.  The
default config file can be named by the ``EVTRISK_CONFIG`` environment
variable.
"""

from __future__ import annotations

import dataclasses
import os
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .blocks import DEFAULT_MIN_EDGE_OBS, BlockScheme
from .gev import FitConfig, GevParams
from .ingest import ColumnMap
from .validation import check_fraction, check_k, check_level

CONFIG_ENV_VAR = "EVTRISK_CONFIG"
TAILS = ("upper", "lower")


class ConfigError(ValueError):
    """Invalid or inconsistent run configuration (a usage error)."""


@dataclass(frozen=True)
class InputSpec:
    path: Path
    kind: str = "prices"
    label: str | None = None
    columns: ColumnMap = field(default_factory=ColumnMap)

    @property
    def name(self):
        return self.label or self.path.stem


@dataclass(frozen=True)
class SimulateConfig:
    truth: GevParams = GevParams(0.167, 0.546, 1.411)
    n_maxima: int = 192
    replications: int = 500
    ci_params: tuple = ("shape", "scale", "location")


@dataclass(frozen=True)
class RunConfig:
    inputs: tuple = ()
    tails: tuple = TAILS
    schemes: tuple = (BlockScheme("month"), BlockScheme("quarter"), BlockScheme("semester"))
    ks: tuple = (20.0,)
    level: float = 0.95
    fraction: float = 0.10
    seed: int = 0
    min_edge_obs: int = DEFAULT_MIN_EDGE_OBS
    optimizer: FitConfig = FitConfig()
    out_dir: Path = Path("evtrisk-out")
    formats: tuple = ("csv", "json")
    normalize: bool = False
    simulate: SimulateConfig = SimulateConfig()

    def validate(self, need_inputs=True):
        if need_inputs and not self.inputs:
            raise ConfigError("at least one input file is required")
        if not self.schemes:
            raise ConfigError("at least one block scheme is required")
        if not self.ks:
            raise ConfigError("at least one k is required")
        try:
            for k in self.ks:
                check_k(k)
            check_level(self.level)
            check_fraction(self.fraction)
        except ValueError as exc:
            raise ConfigError(str(exc)) from None
        bad = set(self.formats) - {"csv", "json"}
        if bad or not self.formats:
            raise ConfigError(f"formats must be csv and/or json, got {list(self.formats)}")
        return self

    def echo(self):
        """JSON-friendly description of the run, free of absolute paths."""
        return {
            "inputs": [
                {"file": spec.path.name, "kind": spec.kind, "label": spec.name} for spec in self.inputs
            ],
            "tails": list(self.tails),
            "schemes": [str(s) for s in self.schemes],
            "k": list(self.ks),
            "level": self.level,
            "fraction": self.fraction,
            "seed": self.seed,
            "min_edge_obs": self.min_edge_obs,
            "optimizer": dataclasses.asdict(self.optimizer),
        }


def parse_tail(text):
    text = str(text).lower()
    if text == "both":
        return TAILS
    if text in TAILS:
        return (text,)
    raise ConfigError(f"tail must be upper, lower or both, got {text!r}")


def parse_schemes(value):
    items = value.split(",") if isinstance(value, str) else list(value)
    try:
        return tuple(BlockScheme.parse(v) for v in items if str(v).strip())
    except ValueError as exc:
        raise ConfigError(str(exc)) from None


def parse_ks(value):
    items = value.split(",") if isinstance(value, str) else (value if isinstance(value, (list, tuple)) else [value])
    try:
        return tuple(float(v) for v in items if str(v).strip())
    except ValueError:
        raise ConfigError(f"k values must be numbers, got {value!r}") from None


def _input_spec(entry, base):
    if isinstance(entry, str):
        entry = {"path": entry}
    entry = dict(entry)
    path = Path(entry.pop("path"))
    if not path.is_absolute():
        path = base / path
    kind = entry.pop("kind", "prices")
    if kind not in ("prices", "returns"):
        raise ConfigError(f"input kind must be prices or returns, got {kind!r}")
    try:
        columns = ColumnMap.from_mapping(entry.pop("columns", None))
    except TypeError as exc:
        raise ConfigError(f"bad column map: {exc}") from None
    label = entry.pop("label", None)
    if entry:
        raise ConfigError(f"unknown input keys: {sorted(entry)}")
    return InputSpec(path=path, kind=kind, label=label, columns=columns)


def _simulate(mapping, current):
    mapping = dict(mapping or {})
    truth = mapping.pop("truth", None)
    kwargs = {}
    if truth is not None:
        kwargs["truth"] = GevParams(**truth) if isinstance(truth, dict) else GevParams(*truth)
    for key in ("n_maxima", "replications"):
        if key in mapping:
            kwargs[key] = int(mapping.pop(key))
    if "ci_params" in mapping:
        kwargs["ci_params"] = tuple(mapping.pop("ci_params"))
    if mapping:
        raise ConfigError(f"unknown simulate keys: {sorted(mapping)}")
    return dataclasses.replace(current, **kwargs)


def from_mapping(data, base=Path("."), config=None):
    """Apply a parsed config mapping on top of ``config`` (defaults if None)."""
    config = config or RunConfig()
    data = dict(data or {})
    updates = {}
    if "inputs" in data:
        updates["inputs"] = tuple(_input_spec(e, base) for e in data.pop("inputs"))
    if "tail" in data:
        updates["tails"] = parse_tail(data.pop("tail"))
    if "schemes" in data:
        updates["schemes"] = parse_schemes(data.pop("schemes"))
    if "k" in data:
        updates["ks"] = parse_ks(data.pop("k"))
    for key, conv in (("level", float), ("fraction", float), ("seed", int), ("min_edge_obs", int)):
        if key in data:
            updates[key] = conv(data.pop(key))
    if "optimizer" in data:
        try:
            updates["optimizer"] = FitConfig.from_mapping(data.pop("optimizer") or {})
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
    if "out" in data:
        out = Path(data.pop("out"))
        updates["out_dir"] = out if out.is_absolute() else base / out
    if "formats" in data:
        fmts = data.pop("formats")
        updates["formats"] = tuple(fmts.split(",") if isinstance(fmts, str) else fmts)
    if "simulate" in data:
        updates["simulate"] = _simulate(data.pop("simulate"), config.simulate)
    if data:
        raise ConfigError(f"unknown config keys: {sorted(data)}")
    return dataclasses.replace(config, **updates)


def load_config(path):
    path = Path(path)
    try:
        with path.open(encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc}") from None
    except yaml.YAMLError as exc:
        raise ConfigError(f"invalid YAML in {path}: {exc}") from None
    if not isinstance(data, dict):
        raise ConfigError(f"config {path} must be a mapping")
    return from_mapping(data, base=path.parent)


def default_config_path():
    value = os.environ.get(CONFIG_ENV_VAR)
    return Path(value) if value else None
