import math
import os
from dataclasses import dataclass, field
from functools import lru_cache
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import yaml

from .errors import ConfigError, InvalidPulseError
from .gates.pulses import PulseSpec
from .gates.synthesis import parse_target, reflection_axis


def _env(name: str, default: str) -> Any:
    return field(default_factory=lambda: os.environ.get(name, default))


def _optional_int(name: str) -> Optional[int]:
    raw = os.environ.get(name, "").strip()
    return int(raw) if raw else None


@dataclass
class Settings:
    db_path: str = _env("NSGATE_DB_PATH", "./data/nsgate.sqlite")
    config_path: str = _env("NSGATE_CONFIG_PATH", "./config/fig1.json")
    output_dir: str = _env("NSGATE_OUTPUT_DIR", "./data")
    # None leaves the worker count to the experiment config.
    workers: Optional[int] = field(default_factory=lambda: _optional_int("NSGATE_WORKERS"))
    log_level: str = _env("NSGATE_LOG_LEVEL", "INFO")
    battery_steps: int = field(default_factory=lambda: int(os.environ.get("NSGATE_BATTERY_STEPS", "400")))
    seed: int = field(default_factory=lambda: int(os.environ.get("NSGATE_SEED", "20240601")))

    @property
    def ledger_enabled(self) -> bool:
        return bool(self.db_path)


@lru_cache
def get_settings() -> Settings:
    return Settings()


def _load_yaml(path: str) -> Dict[str, Any]:
    file_path = Path(path)
    if not file_path.exists():
        raise ConfigError(f"config file not found: {path}")
    with file_path.open("r", encoding="utf-8") as handle:
        try:
            data = yaml.safe_load(handle) or {}
        except yaml.YAMLError as exc:
            raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path} must hold a mapping at the top level")
    return data


DEFAULT_G_VALUES: Tuple[float, ...] = tuple(float(g) for g in np.logspace(-3, 0, 30))
DEFAULT_SLOPE_WINDOW: Tuple[float, float] = (10**-2.5, 10**-1)
NF_CHOICES = (1, 2, 3)


def _floats(name: str, values: Any) -> Tuple[float, ...]:
    if not isinstance(values, (list, tuple)) or not values:
        raise ConfigError(f"{name} must be a non-empty list of numbers")
    try:
        out = tuple(float(v) for v in values)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{name} must hold numbers: {values!r}") from exc
    if not all(math.isfinite(v) and v >= 0 for v in out):
        raise ConfigError(f"{name} must be finite and non-negative: {values!r}")
    return out


def _int(name: str, value: Any, minimum: int) -> int:
    if isinstance(value, bool) or not isinstance(value, int) or value < minimum:
        raise ConfigError(f"{name} must be an integer ≥ {minimum}, got {value!r}")
    return value


@dataclass(frozen=True)
class ExperimentConfig:
    """The fidelity-sweep experiment. Defaults reproduce the Γ = γ = 0.1Ω, Pauli-Z setup."""

    g_values: Tuple[float, ...] = DEFAULT_G_VALUES
    nbar_values: Tuple[float, ...] = (0.0, 1.0)
    gamma_ratio: float = 0.1
    pulse: PulseSpec = field(default_factory=PulseSpec.pi_pulse)
    gate: str = "pauli-z"
    nf_state: int = 1
    steps: int = 2000
    output: Optional[str] = None
    seed: int = 20240601
    workers: int = 1
    slope_window: Tuple[float, float] = DEFAULT_SLOPE_WINDOW

    @classmethod
    def from_mapping(cls, data: Mapping[str, Any]) -> "ExperimentConfig":
        unknown = set(data) - set(cls.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        kwargs: Dict[str, Any] = {}
        if "g_values" in data:
            g_values = _floats("g_values", data["g_values"])
            if any(b <= a for a, b in zip(g_values, g_values[1:])):
                raise ConfigError("g_values must be strictly increasing")
            kwargs["g_values"] = g_values
        if "nbar_values" in data:
            kwargs["nbar_values"] = _floats("nbar_values", data["nbar_values"])
        if "gamma_ratio" in data:
            kwargs["gamma_ratio"] = _floats("gamma_ratio", [data["gamma_ratio"]])[0]
        if "pulse" in data:
            if not isinstance(data["pulse"], Mapping):
                raise ConfigError("pulse must be a mapping with shape, amplitude and optional duration")
            try:
                kwargs["pulse"] = PulseSpec.from_mapping(data["pulse"])
            except InvalidPulseError as exc:
                raise ConfigError(str(exc)) from exc
        if "gate" in data:
            kwargs["gate"] = str(data["gate"])
        if "nf_state" in data:
            if data["nf_state"] not in NF_CHOICES:
                raise ConfigError(f"nf_state must be one of {NF_CHOICES}, got {data['nf_state']!r}")
            kwargs["nf_state"] = int(data["nf_state"])
        if "steps" in data:
            kwargs["steps"] = _int("steps", data["steps"], 100)
        if "output" in data:
            kwargs["output"] = None if data["output"] is None else str(data["output"])
        if "seed" in data:
            kwargs["seed"] = _int("seed", data["seed"], 0)
        if "workers" in data:
            kwargs["workers"] = _int("workers", data["workers"], 1)
        if "slope_window" in data:
            window = _floats("slope_window", data["slope_window"])
            if len(window) != 2 or not 0 < window[0] < window[1]:
                raise ConfigError(f"slope_window must be [lo, hi] with 0 < lo < hi, got {data['slope_window']!r}")
            kwargs["slope_window"] = (window[0], window[1])
        cfg = cls(**kwargs)
        cfg.reflection_axis()
        return cfg

    def to_mapping(self) -> Dict[str, Any]:
        return {
            "g_values": list(self.g_values),
            "nbar_values": list(self.nbar_values),
            "gamma_ratio": self.gamma_ratio,
            "pulse": self.pulse.to_mapping(),
            "gate": self.gate,
            "nf_state": self.nf_state,
            "steps": self.steps,
            "output": self.output,
            "seed": self.seed,
            "workers": self.workers,
            "slope_window": list(self.slope_window),
        }

    def reflection_axis(self) -> np.ndarray:
        """Bloch axis of the single-pulse gate; other targets need two pulses and are rejected."""
        _, target = parse_target(self.gate)
        return reflection_axis(target)


def load_experiment_config(path: Optional[str] = None) -> ExperimentConfig:
    return ExperimentConfig.from_mapping(_load_yaml(path or get_settings().config_path))
