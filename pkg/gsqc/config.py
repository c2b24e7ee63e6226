"""Run configuration: a flat YAML mapping of flag values, overridden by CLI flags."""
from __future__ import annotations

import math
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Any

import numpy as np
import yaml

from .circuit.library import BELL_STAGES, FAMILIES, MIN_STEPS
from .spectral.eigensolve import METHODS
from .spectral.gaps import min_grid_points

CONFIG_ENV = "GSQC_CONFIG"
_SEARCH_PATHS = [Path("gsqc.yaml")]

COMMANDS = ("build", "gap-scan", "evolve", "verify", "example")
CLI_SCHEDULES = ("linear", "gap-adapted")
MAX_SEED = 2**64 - 1

# file keys that differ from the field name
_FILE_KEYS = {"lambda": "lam"}


class ConfigError(ValueError):
    """Raised when a run configuration is invalid."""

    def __init__(self, violations: list[str]) -> None:
        self.violations = violations
        super().__init__("; ".join(violations))


@dataclass
class RunConfig:
    command: str = ""
    circuit: str | None = None
    lam: float = 1.0
    grid: str = "0:1:41"
    schedule: str = "linear"
    T: float = 100.0
    dt: float | None = None
    method: str = "dense"
    out: str = "."
    seed: int | None = None
    workers: int = 1
    refine: bool = True
    family: str | None = None
    n_range: str | None = None
    stage: str = "middle"
    target_fidelity: float = 0.9
    operator: str | None = None
    checks: str | None = None
    example: str | None = None
    steps: int = 6

    @property
    def lambdas(self) -> np.ndarray:
        return parse_grid(self.grid)

    @property
    def n_values(self) -> list[int]:
        return parse_n_range(self.n_range) if self.n_range else []

    def merged(self, overrides: dict[str, Any]) -> RunConfig:
        """A copy with ``overrides`` (field names) applied on top."""
        values = asdict(self)
        values.update({k: v for k, v in overrides.items() if k in values})
        return config_from_mapping(values)


_CONVERTERS: dict[str, Any] = {
    "lam": float,
    "T": float,
    "dt": float,
    "seed": int,
    "workers": int,
    "target_fidelity": float,
    "steps": int,
}
_STRINGS = {"command", "circuit", "grid", "schedule", "method", "out", "family",
            "n_range", "stage", "operator", "checks", "example"}
_RANGES = {"grid", "n_range"}


def config_from_mapping(data: dict[str, Any]) -> RunConfig:
    """Build a RunConfig from file keys or field names; unknown keys are errors."""
    known = {f.name for f in fields(RunConfig)}
    values: dict[str, Any] = {}
    errors: list[str] = []
    for raw_key, raw in data.items():
        key = _FILE_KEYS.get(str(raw_key), str(raw_key).replace("-", "_"))
        if key not in known:
            errors.append(f"unknown key '{raw_key}'")
            continue
        if raw is None:
            values[key] = None
            continue
        try:
            values[key] = _convert(key, raw)
        except (TypeError, ValueError):
            hint = "; quote range values" if key in _RANGES else ""
            errors.append(f"{raw_key}: cannot interpret {raw!r}{hint}")
    if errors:
        raise ConfigError(errors)
    defaults = RunConfig()
    for key in ("lam", "grid", "schedule", "T", "method", "out", "workers", "refine",
                "stage", "target_fidelity", "steps"):
        if values.get(key, "") is None:
            values[key] = getattr(defaults, key)
    return RunConfig(**values)


def load_config(path: Path) -> RunConfig:
    try:
        with open(path) as f:
            data = yaml.safe_load(f)
    except yaml.YAMLError as exc:
        raise ConfigError([f"{path}: invalid YAML: {exc}"]) from exc
    if data is None:
        return RunConfig()
    if not isinstance(data, dict):
        raise ConfigError([f"{path}: expected a YAML mapping at top level"])
    return config_from_mapping(data)


def dump_config(config: RunConfig) -> str:
    data = {}
    for key, value in asdict(config).items():
        file_key = next((k for k, v in _FILE_KEYS.items() if v == key), key)
        data[file_key] = value
    return yaml.safe_dump(data, sort_keys=True)


def validate_config(config: RunConfig) -> list[str]:
    """Return a list of violations; empty when the configuration is usable."""
    errors: list[str] = []
    if config.command and config.command not in COMMANDS:
        errors.append(f"unknown command '{config.command}'")
    if not 0.0 <= config.lam <= 1.0:
        errors.append(f"lambda must lie in [0, 1], got {config.lam}")
    try:
        lams = parse_grid(config.grid)
    except ValueError as exc:
        errors.append(f"grid: {exc}")
    else:
        needed = min_grid_points(config.refine)
        if _scans_grid(config) and len(lams) < needed:
            hint = "" if not config.refine else " (or pass --no-refine)"
            errors.append(f"grid: {config.command} needs at least {needed} points{hint}, got {len(lams)}")
    if config.schedule not in CLI_SCHEDULES:
        errors.append(f"schedule must be one of {', '.join(CLI_SCHEDULES)}, got '{config.schedule}'")
    if not (math.isfinite(config.T) and config.T >= 0):
        errors.append(f"T must be finite and >= 0, got {config.T}")
    if config.dt is not None and not (math.isfinite(config.dt) and config.dt > 0):
        errors.append(f"dt must be > 0, got {config.dt}")
    if config.method not in METHODS:
        errors.append(f"method must be one of {', '.join(METHODS)}, got '{config.method}'")
    if config.seed is not None and not 0 <= config.seed <= MAX_SEED:
        errors.append(f"seed must be an unsigned 64-bit integer, got {config.seed}")
    if config.workers < 1:
        errors.append(f"workers must be >= 1, got {config.workers}")
    if config.stage not in BELL_STAGES:
        errors.append(f"stage must be one of {', '.join(BELL_STAGES)}, got '{config.stage}'")
    if not 0.0 < config.target_fidelity < 1.0:
        errors.append(f"target fidelity must lie in (0, 1), got {config.target_fidelity}")
    if config.steps < 1:
        errors.append(f"steps must be >= 1, got {config.steps}")
    elif not config.circuit and config.steps < MIN_STEPS.get(config.example or "", 1):
        errors.append(f"steps: {config.example} needs at least {MIN_STEPS[config.example]}, got {config.steps}")
    if config.family is not None and config.family not in FAMILIES:
        errors.append(f"family must be one of {', '.join(FAMILIES)}, got '{config.family}'")
    if config.n_range is not None:
        try:
            n_values = parse_n_range(config.n_range)
        except ValueError as exc:
            errors.append(f"n-range: {exc}")
        else:
            minimum = MIN_STEPS.get(config.family or "", 1)
            if min(n_values) < minimum:
                errors.append(f"n-range: {config.family} needs N >= {minimum}, got {min(n_values)}")
    return errors


def _scans_grid(config: RunConfig) -> bool:
    if config.command == "gap-scan":
        return True
    return config.command == "evolve" and config.schedule == "gap-adapted" and not config.family


def require_valid(config: RunConfig) -> RunConfig:
    errors = validate_config(config)
    if errors:
        raise ConfigError(errors)
    return config


def parse_grid(text: str) -> np.ndarray:
    """``start:stop:count`` -> ``count`` evenly spaced lambda values."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected start:stop:count, got '{text}'")
    try:
        start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
    except ValueError:
        raise ValueError(f"expected start:stop:count, got '{text}'") from None
    if count < 1:
        raise ValueError("grid is empty")
    if not (0.0 <= start <= 1.0 and 0.0 <= stop <= 1.0):
        raise ValueError(f"grid endpoints must lie in [0, 1], got {start}, {stop}")
    if count > 1 and start == stop:
        raise ValueError("grid has repeated points")
    return np.linspace(start, stop, count)


def parse_n_range(text: str) -> list[int]:
    """``a:b`` (inclusive), ``a:b:step`` or a comma list ``3,5,7``."""
    try:
        if ":" in text:
            parts = [int(p) for p in text.split(":")]
            if len(parts) not in (2, 3):
                raise ValueError
            step = parts[2] if len(parts) == 3 else 1
            if step < 1:
                raise ValueError
            values = list(range(parts[0], parts[1] + 1, step))
        else:
            values = [int(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise ValueError(f"expected a:b, a:b:step or a comma list, got '{text}'") from None
    if not values:
        raise ValueError(f"'{text}' selects no values")
    if min(values) < 1:
        raise ValueError("N values must be >= 1")
    return values


class ConfigLocator:
    """Finds the run configuration file: explicit path, then $GSQC_CONFIG, then ./gsqc.yaml."""

    def __init__(self, config_path: Path | None = None) -> None:
        self._explicit_path = config_path

    def resolve(self) -> Path | None:
        if self._explicit_path is not None:
            if self._explicit_path.exists():
                return self._explicit_path
            raise ConfigError([
                f"config file not found: {self._explicit_path} "
                f"(searched: {', '.join(self.searched_locations())})"
            ])

        env_path = os.environ.get(CONFIG_ENV)
        if env_path:
            p = Path(env_path)
            if p.exists():
                return p

        for p in _SEARCH_PATHS:
            if p.exists():
                return p

        return None

    def searched_locations(self) -> list[str]:
        locations: list[str] = []
        if self._explicit_path:
            locations.append(str(self._explicit_path))
        env_path = os.environ.get(CONFIG_ENV)
        if env_path:
            locations.append(f"${CONFIG_ENV} ({env_path})")
        locations.extend(str(p) for p in _SEARCH_PATHS)
        return locations

    def load(self) -> RunConfig:
        path = self.resolve()
        return load_config(path) if path is not None else RunConfig()


def _convert(key: str, raw: Any) -> Any:
    if key == "refine":
        value = _normalize_bool(raw)
        if not isinstance(value, bool):
            raise ValueError(raw)
        return value
    if key in _CONVERTERS:
        if isinstance(raw, bool):
            raise TypeError(raw)
        if _CONVERTERS[key] is int and isinstance(raw, float) and not raw.is_integer():
            raise ValueError(raw)
        return _CONVERTERS[key](raw)
    if key in _RANGES and not isinstance(raw, str):
        # unquoted a:b is read by YAML as a base-60 integer
        raise ValueError(raw)
    if key in _STRINGS:
        return str(raw)
    return raw


def _normalize_bool(value: Any) -> bool | Any:
    """Coerce string booleans to actual bools. Pass through non-strings unchanged."""
    if isinstance(value, bool):
        return value
    if isinstance(value, str):
        lowered = value.strip().lower()
        if lowered in ("true", "1", "yes"):
            return True
        if lowered in ("false", "0", "no"):
            return False
    return value
