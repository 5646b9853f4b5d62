"""Run configuration: one JSON file, overridable from the command line."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional

from .errors import DataError
from .llm import MODES


@dataclass(frozen=True)
class LlmConfig:
    mode: str = "replay"
    endpoint: Optional[str] = None
    model: str = ""
    temperature: float = 0.0
    max_output_tokens: int = 2048
    cassette_dir: Optional[str] = None
    api_key_env: Optional[str] = None
    responder: Optional[str] = None  # "module:function", scripted mode only

    def __post_init__(self):
        if self.mode not in MODES:
            raise DataError(f"llm.mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if not 0.0 <= self.temperature <= 2.0:
            raise DataError("llm.temperature must lie in [0, 2]")


@dataclass(frozen=True)
class PipelineConfig:
    prepare_runs: int = 3
    window_lines: int = 3
    initial_margin: int = 3
    top_n: int = 1
    candidate_cap: int = 16
    workers: int = 1
    seed: int = 0
    context_char_limit: int = 24000

    def __post_init__(self):
        if self.prepare_runs < 1:
            raise DataError("pipeline.prepare_runs must be at least 1")
        for name in ("window_lines", "initial_margin", "top_n", "candidate_cap", "workers"):
            if getattr(self, name) < 1:
                raise DataError(f"pipeline.{name} must be at least 1")


@dataclass(frozen=True)
class PathsConfig:
    repos_dir: Optional[str] = None


@dataclass(frozen=True)
class Config:
    llm: LlmConfig = field(default_factory=LlmConfig)
    pipeline: PipelineConfig = field(default_factory=PipelineConfig)
    paths: PathsConfig = field(default_factory=PathsConfig)

    def to_dict(self) -> dict:
        return asdict(self)

    def with_overrides(self, section: str, **values) -> "Config":
        """Copy with non-``None`` values replaced in one section."""
        values = {k: v for k, v in values.items() if v is not None}
        if not values:
            return self
        return replace(self, **{section: replace(getattr(self, section), **values)})


def _section(cls, data, name):
    if data is None:
        return cls()
    if not isinstance(data, dict):
        raise DataError(f"config section {name!r} must be an object")
    known = {f.name for f in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise DataError(f"unknown keys in config section {name!r}: {', '.join(unknown)}")
    try:
        return cls(**data)
    except TypeError as exc:
        raise DataError(f"bad config section {name!r}: {exc}") from exc


def config_from_dict(data: dict, base_dir=None) -> Config:
    unknown = sorted(set(data) - {"llm", "pipeline", "paths"})
    if unknown:
        raise DataError(f"unknown config sections: {', '.join(unknown)}")
    llm = _section(LlmConfig, data.get("llm"), "llm")
    paths = _section(PathsConfig, data.get("paths"), "paths")
    if base_dir is not None:
        # relative paths in a config file are relative to that file
        if llm.cassette_dir and not Path(llm.cassette_dir).is_absolute():
            llm = replace(llm, cassette_dir=str(Path(base_dir) / llm.cassette_dir))
        if paths.repos_dir and not Path(paths.repos_dir).is_absolute():
            paths = replace(paths, repos_dir=str(Path(base_dir) / paths.repos_dir))
    return Config(llm, _section(PipelineConfig, data.get("pipeline"), "pipeline"), paths)


def load_config(path=None) -> Config:
    if path is None:
        return Config()
    path = Path(path)
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        raise DataError(f"cannot read config {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise DataError(f"config {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise DataError(f"config {path} must hold a JSON object")
    return config_from_dict(data, base_dir=path.parent)
