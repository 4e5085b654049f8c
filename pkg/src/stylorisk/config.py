"""Run configuration for the pipeline, provider and CLI.

Values come from (lowest to highest precedence): dataclass defaults, a
JSON config file, explicit keyword/flag overrides.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field, fields, replace
from pathlib import Path


@dataclass(frozen=True)
class ProviderConfig:
    kind: str = "stub"
    base_url: str | None = None
    model: str = "gpt-4.1"
    embed_model: str = "text-embedding-3-small"
    temperature: float = 0.0
    max_tokens: int = 1024
    fixtures_path: str | None = None
    strict_fixtures: bool = False
    max_attempts: int = 3
    backoff_base: float = 0.5
    max_in_flight: int = 4


@dataclass(frozen=True)
class PipelineConfig:
    mode: str = "db"                 # "db" or "zero_shot"
    strategy: str = "sala"           # "es", "lda" or "sala"
    candidates_n: int = 20
    samples_per_candidate: int = 5
    alpha: float = 0.5
    fallback_cutoff: float = 0.05
    decision_threshold: float = 0.5
    utility_floor: float = 0.85
    semantic_source: str = "lexicon"
    store_path: str | None = None
    seed: int = 42
    jobs: int = 1
    provider: ProviderConfig = field(default_factory=ProviderConfig)


def load_config(path) -> PipelineConfig:
    data = json.loads(Path(path).read_text("utf-8"))
    return config_from_dict(data)


def config_from_dict(data: dict) -> PipelineConfig:
    provider_data = data.pop("provider", {})
    known = {f.name for f in fields(PipelineConfig)} - {"provider"}
    unknown = set(data) - known
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    provider_known = {f.name for f in fields(ProviderConfig)}
    bad = set(provider_data) - provider_known
    if bad:
        raise ValueError(f"unknown provider config keys: {sorted(bad)}")
    return PipelineConfig(provider=ProviderConfig(**provider_data), **data)


def override(config: PipelineConfig, **kwargs) -> PipelineConfig:
    """Apply non-None overrides; provider_* keys go to the provider block."""
    provider_updates = {}
    top_updates = {}
    for key, value in kwargs.items():
        if value is None:
            continue
        if key.startswith("provider_"):
            provider_updates[key[len("provider_"):]] = value
        else:
            top_updates[key] = value
    provider = replace(config.provider, **provider_updates) if provider_updates else config.provider
    return replace(config, provider=provider, **top_updates)
