"""Run configuration: TOML/JSON files, ``${VAR}`` interpolation, flag overrides."""

from __future__ import annotations

import json
import os
import re
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Mapping

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .backend import BackendConfig
from .errors import ConfigError

EXPERIMENTS = ("bfi2", "open-mindedness", "persuasion", "peer-pressure")
DEFAULT_API_KEY_ENV = "BELIEFBOX_API_KEY"
_ENV_REF = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")


@dataclass
class BackendSection:
    base_url: str = "http://localhost:11434"
    model: str = "llama3.3:70b-instruct-q4_0"
    temperature: float = 0.7
    timeout: float = 120.0
    max_retries: int = 3
    backoff: float = 1.0
    api_key_env: str = DEFAULT_API_KEY_ENV


@dataclass
class RunConfig:
    experiment: str = "persuasion"
    dataset: str | None = None
    dataset_kind: str | None = None
    sample_size: int | None = None
    item_bank: str | None = None
    seed: int = 0
    out: str = "runs/latest"
    concurrency: int = 4
    scripted: str | None = None
    rounds: int = 4
    runs: int | None = None
    levels: list[int] = field(default_factory=lambda: [1, 2, 3, 4, 5])
    directions: list[str] = field(default_factory=lambda: ["misaligned->aligned", "aligned->misaligned"])
    conditions: list[str] = field(default_factory=lambda: ["p=1", "p=5", "not-p=1", "not-p=5", "neutral"])
    group_sizes: list[int] | None = None
    target_level: int = 5
    persuader_level: int = 1
    openness: int = 5
    strength: int = 5
    change_threshold: int | None = None
    backend: BackendSection = field(default_factory=BackendSection)

    def validate(self) -> None:
        if self.experiment not in EXPERIMENTS:
            raise ConfigError(f"experiment must be one of {EXPERIMENTS}, got {self.experiment!r}")
        if self.experiment != "bfi2" and not self.dataset:
            raise ConfigError(f"experiment {self.experiment!r} needs a dataset path")
        if self.concurrency < 1:
            raise ConfigError("concurrency must be >= 1")
        if self.rounds < 1:
            raise ConfigError("rounds must be >= 1")
        if self.runs is not None and self.runs < 1:
            raise ConfigError("runs must be >= 1")
        if self.sample_size is not None and self.sample_size < 0:
            raise ConfigError("sample_size must be >= 0")
        if self.group_sizes is not None and any(g < 1 for g in self.group_sizes):
            raise ConfigError("group sizes must be >= 1")
        self.backend_config()

    @property
    def effective_runs(self) -> int:
        if self.runs is not None:
            return self.runs
        return 3 if self.experiment in ("bfi2", "open-mindedness") else 5

    def backend_config(self) -> BackendConfig:
        b = self.backend
        return BackendConfig(
            base_url=b.base_url,
            model_name=b.model,
            temperature=float(b.temperature),
            timeout=float(b.timeout),
            max_retries=int(b.max_retries),
            api_key=os.environ.get(b.api_key_env) or None,
            backoff=float(b.backoff),
        )

    def to_dict(self) -> dict:
        return asdict(self)


def interpolate(value: Any) -> Any:
    """Replace ``${VAR}`` with the environment value in every string."""
    if isinstance(value, str):
        return _ENV_REF.sub(lambda m: os.environ.get(m.group(1), ""), value)
    if isinstance(value, list):
        return [interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: interpolate(v) for k, v in value.items()}
    return value


def from_mapping(data: Mapping[str, Any]) -> RunConfig:
    data = interpolate(dict(data))
    known = {f.name for f in fields(RunConfig)}
    unknown = set(data) - known
    if unknown:
        raise ConfigError(f"unknown config key(s): {sorted(unknown)}")
    backend_data = data.pop("backend", {}) or {}
    bknown = {f.name for f in fields(BackendSection)}
    bunknown = set(backend_data) - bknown
    if bunknown:
        raise ConfigError(f"unknown [backend] key(s): {sorted(bunknown)}")
    return RunConfig(**data, backend=BackendSection(**backend_data))


def load_config(path: str | Path) -> RunConfig:
    p = Path(path)
    if not p.is_file():
        raise ConfigError(f"config file not found: {p}")
    text = p.read_text(encoding="utf-8")
    try:
        data = json.loads(text) if p.suffix.lower() == ".json" else tomllib.loads(text)
    except (json.JSONDecodeError, tomllib.TOMLDecodeError) as exc:
        raise ConfigError(f"{p}: {exc}") from exc
    return from_mapping(data)


def apply_overrides(cfg: RunConfig, overrides: Mapping[str, Any]) -> RunConfig:
    """Set non-None overrides; keys may address the backend as ``backend.<name>``."""
    for key, value in overrides.items():
        if value is None:
            continue
        if key.startswith("backend."):
            setattr(cfg.backend, key.split(".", 1)[1], value)
        else:
            setattr(cfg, key, value)
    return cfg
