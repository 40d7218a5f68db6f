"""Run configuration: one JSON document with embedding, fit, policy and scenario sections."""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .detection import ThresholdPolicy
from .embedding import EmbeddingConfig
from .errors import ConfigurationError
from .latent_model import FitConfig
from .waveform import ArcFaultScenario

SECTIONS = {
    "embedding": EmbeddingConfig,
    "fit": FitConfig,
    "policy": ThresholdPolicy,
    "scenario": ArcFaultScenario,
}


def _build(cls, data, path: str):
    if not isinstance(data, dict):
        raise ConfigurationError(f"'{path}' must be a JSON object")
    known = {f.name: f for f in fields(cls)}
    for key, value in data.items():
        if key not in known:
            raise ConfigurationError(f"unknown key '{path}.{key}'")
        default = known[key].default
        # reject wrongly typed values early so the message carries the path
        if isinstance(value, (dict, list)) or (isinstance(value, bool) and not isinstance(default, bool)):
            raise ConfigurationError(f"'{path}.{key}' has invalid value {value!r}")
        if isinstance(value, str) and not isinstance(default, str):
            raise ConfigurationError(f"'{path}.{key}' must be a number, got {value!r}")
    try:
        return cls(**data)
    except ConfigurationError as exc:
        raise ConfigurationError(f"'{path}': {exc}") from None
    except (TypeError, ValueError) as exc:
        raise ConfigurationError(f"'{path}': {exc}") from None


@dataclass(frozen=True)
class RunConfig:
    embedding: EmbeddingConfig = field(default_factory=EmbeddingConfig)
    fit: FitConfig = field(default_factory=FitConfig)
    policy: ThresholdPolicy = field(default_factory=ThresholdPolicy)
    scenario: ArcFaultScenario = field(default_factory=ArcFaultScenario)

    @classmethod
    def from_dict(cls, data) -> "RunConfig":
        if not isinstance(data, dict):
            raise ConfigurationError("configuration must be a JSON object")
        for key in data:
            if key not in SECTIONS:
                raise ConfigurationError(f"unknown key '{key}'")
        return cls(**{name: _build(kind, data[name], name)
                      for name, kind in SECTIONS.items() if name in data})

    def to_dict(self) -> dict:
        return {
            "embedding": asdict(self.embedding),
            "fit": asdict(self.fit),
            "policy": self.policy.to_dict(),
            "scenario": self.scenario.to_dict(),
        }


def load_config(path) -> RunConfig:
    """Parse a configuration file; ``None`` gives all defaults."""
    if path is None:
        return RunConfig()
    text = Path(path).read_text(encoding="utf-8")
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigurationError(f"{path}: invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from None
    return RunConfig.from_dict(data)
