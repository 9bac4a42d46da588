"""Configuration for every pipeline stage.

All knobs live in one flat key/value document (JSON object whose keys are
dotted, e.g. ``{"buffer.capacity": 50000}``).  Any key can be overridden on
the command line with ``--set key=value``.  Unknown keys are a hard error so
typos never silently no-op.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any


class ConfigError(ValueError):
    """Invalid configuration key or value (CLI exit code 1)."""


@dataclass
class BufferConfig:
    capacity: int = 50_000
    ttl_ms: float = 5_000.0

    def validate(self) -> None:
        if self.capacity < 1:
            raise ConfigError("buffer.capacity must be >= 1")
        if self.ttl_ms <= 0:
            raise ConfigError("buffer.ttl_ms must be > 0")


@dataclass
class ScorerConfig:
    """Model parameters plus how many events the scorer drains per cycle.

    The weights follow the feature order (severity, reputation,
    actor frequency, context match).  Defaults are picked so a max-severity
    event inside the analyst's investigation context classifies critical
    while quiet low-severity traffic stays informational.
    """

    weights: tuple[float, float, float, float] = (2.5, 1.5, 1.0, 2.0)
    bias: float = -2.0
    critical_min: float = 0.8
    warning_min: float = 0.4
    actor_window_ms: float = 60_000.0
    freq_norm: float = 100.0
    max_per_cycle: int = 2_000

    def validate(self) -> None:
        if len(tuple(self.weights)) != 4:
            raise ConfigError("scorer.weights must have exactly 4 components")
        if not 0.0 < self.warning_min < self.critical_min < 1.0:
            raise ConfigError(
                "thresholds must satisfy 0 < scorer.warning_min < scorer.critical_min < 1"
            )
        if self.actor_window_ms <= 0 or self.freq_norm <= 0:
            raise ConfigError("scorer.actor_window_ms and scorer.freq_norm must be > 0")
        if self.max_per_cycle < 1:
            raise ConfigError("scorer.max_per_cycle must be >= 1")


@dataclass
class CompactorConfig:
    threshold: int = 3
    window_ms: float = 10_000.0
    key_fields: tuple[str, ...] = ("source_id", "kind")

    def validate(self) -> None:
        if self.threshold < 2:
            raise ConfigError("compactor.threshold must be >= 2")
        if self.window_ms <= 0:
            raise ConfigError("compactor.window_ms must be > 0")
        allowed = {"source_id", "kind", "actor_id"}
        bad = set(self.key_fields) - allowed
        if bad or not self.key_fields:
            raise ConfigError(f"compactor.key_fields may only contain {sorted(allowed)}")


@dataclass
class PolicyConfig:
    interval_idle_ms: float = 16.0
    interval_interacting_ms: float = 300.0
    interval_detached_ms: float = 1_000.0
    budget: int = 50
    cpu_strain_threshold: float = 0.7
    burst_threshold: float = 0.5
    scroll_threshold: float = 50.0
    detach_ms: float = 30_000.0
    strain_multiplier: float = 2.0

    def validate(self) -> None:
        if self.budget < 1:
            raise ConfigError("policy.budget must be >= 1")
        if not 250.0 <= self.interval_interacting_ms <= 500.0:
            raise ConfigError("policy.interval_interacting_ms must lie in [250, 500]")
        if self.interval_detached_ms < 1_000.0:
            raise ConfigError("policy.interval_detached_ms must be >= 1000")
        if self.strain_multiplier < 1.0:
            raise ConfigError("policy.strain_multiplier must be >= 1")


@dataclass
class SinkConfig:
    # The informational fade band is a hard product constraint: values
    # outside [0.30, 0.40] are rejected, not clamped.
    info_opacity: float = 0.35
    pulse_ms: float = 3_000.0
    truncate_chars: int = 512

    def validate(self) -> None:
        if not 0.30 <= self.info_opacity <= 0.40:
            raise ConfigError("sink.info_opacity must lie within [0.30, 0.40]")
        if self.pulse_ms <= 0:
            raise ConfigError("sink.pulse_ms must be > 0")
        if self.truncate_chars < 16:
            raise ConfigError("sink.truncate_chars must be >= 16")


@dataclass
class AppConfig:
    buffer: BufferConfig = field(default_factory=BufferConfig)
    scorer: ScorerConfig = field(default_factory=ScorerConfig)
    compactor: CompactorConfig = field(default_factory=CompactorConfig)
    policy: PolicyConfig = field(default_factory=PolicyConfig)
    sink: SinkConfig = field(default_factory=SinkConfig)

    def validate(self) -> "AppConfig":
        for section in (self.buffer, self.scorer, self.compactor, self.policy, self.sink):
            section.validate()
        return self

    def to_flat(self) -> dict[str, Any]:
        flat: dict[str, Any] = {}
        for name, section in self._sections().items():
            for f in dataclasses.fields(section):
                value = getattr(section, f.name)
                if isinstance(value, tuple):
                    value = list(value)
                flat[f"{name}.{f.name}"] = value
        return flat

    def _sections(self) -> dict[str, Any]:
        return {
            "buffer": self.buffer,
            "scorer": self.scorer,
            "compactor": self.compactor,
            "policy": self.policy,
            "sink": self.sink,
        }

    def apply(self, key: str, value: Any) -> None:
        section_name, _, field_name = key.partition(".")
        section = self._sections().get(section_name)
        if section is None or field_name not in {f.name for f in dataclasses.fields(section)}:
            raise ConfigError(f"unknown config key: {key}")
        current = getattr(section, field_name)
        setattr(section, field_name, _coerce(key, value, current))


def _coerce(key: str, value: Any, current: Any) -> Any:
    """Coerce ``value`` to the type of the current default for ``key``."""
    try:
        if isinstance(current, tuple):
            if isinstance(value, str):
                value = json.loads(value)
            return tuple(value)
        if isinstance(current, bool):
            if isinstance(value, str):
                return value.lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(current, int):
            return int(value)
        if isinstance(current, float):
            return float(value)
        return str(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {key}: {value!r} ({exc})") from None


def load_config(
    path: str | Path | None = None,
    overrides: list[str] | None = None,
) -> AppConfig:
    """Build an AppConfig from an optional flat JSON file plus --set overrides."""
    cfg = AppConfig()
    if path is not None:
        try:
            raw = json.loads(Path(path).read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config file is not valid JSON: {exc}") from None
        if not isinstance(raw, dict):
            raise ConfigError("config file must hold a flat JSON object")
        for key, value in raw.items():
            cfg.apply(key, value)
    for item in overrides or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects key=value, got {item!r}")
        cfg.apply(key.strip(), value.strip())
    return cfg.validate()


def load_model_file(path: str | Path, base: ScorerConfig | None = None) -> ScorerConfig:
    """Load scorer parameters from a flat JSON document (--model)."""
    cfg = dataclasses.replace(base) if base is not None else ScorerConfig()
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ConfigError(f"model file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"model file is not valid JSON: {exc}") from None
    known = {f.name for f in dataclasses.fields(ScorerConfig)}
    for key, value in raw.items():
        if key not in known:
            raise ConfigError(f"unknown model key: {key}")
        current = getattr(cfg, key)
        setattr(cfg, key, _coerce(f"scorer.{key}", value, current))
    cfg.validate()
    return cfg
