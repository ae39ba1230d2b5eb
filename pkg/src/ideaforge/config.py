"""TOML configuration for stores, providers, chunking, retries, and sources.

Missing file or missing keys fall back to defaults, so `budget.toml` only
needs the sections a deployment actually overrides.
"""

from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

from .ingest import ConferenceSource
from .providers import (
    DEFAULT_BACKOFF_BASE_MS,
    DEFAULT_BUDGET_TOKENS,
    DEFAULT_CHARS_PER_TOKEN,
    DEFAULT_MAX_RETRIES,
)
from .vectorstore import DEFAULT_CHUNK_SIZE


@dataclass
class ProviderConfig:
    kind: str = "mock"  # mock | http
    budget_tokens: int = DEFAULT_BUDGET_TOKENS
    chars_per_token: float = DEFAULT_CHARS_PER_TOKEN
    chat_model: str = "chat-default"
    embed_model: str = "embed-default"
    base_url: str = "http://localhost:8080/v1"
    script: str | None = None      # mock: path to [{pattern, response}] JSON
    embed_dimension: int = 256     # mock embedder
    temperature: float = 0.7


@dataclass
class ScholarConfig:
    base_url: str = "https://api.semanticscholar.org"
    min_interval_s: float = 1.0
    seeds_per_idea: int = 5


@dataclass
class AppConfig:
    store_dir: Path = Path("store")
    topic_count: int = 5
    ablation_no_topics: bool = False
    deterministic: bool = False
    seed: int = 0
    chunk_size: int = DEFAULT_CHUNK_SIZE
    chunk_overlap: int = 0
    max_retries: int = DEFAULT_MAX_RETRIES
    backoff_base_ms: int = DEFAULT_BACKOFF_BASE_MS
    rate_requests_per_window: int = 30
    rate_window_s: float = 1.0
    provider: ProviderConfig = field(default_factory=ProviderConfig)
    scholar: ScholarConfig = field(default_factory=ScholarConfig)
    sources: dict[str, ConferenceSource] = field(default_factory=dict)

    @classmethod
    def from_dict(cls, data: dict, base_dir: Path | None = None) -> "AppConfig":
        base = base_dir or Path.cwd()
        cfg = cls()
        cfg.store_dir = (base / data.get("store_dir", "store")).resolve() \
            if not Path(data.get("store_dir", "store")).is_absolute() \
            else Path(data["store_dir"])
        cfg.topic_count = int(data.get("topic_count", cfg.topic_count))
        cfg.ablation_no_topics = bool(data.get("ablation_no_topics", False))
        cfg.deterministic = bool(data.get("deterministic", False))
        cfg.seed = int(data.get("seed", 0))

        chunking = data.get("chunking", {})
        cfg.chunk_size = int(chunking.get("chunk_size", cfg.chunk_size))
        cfg.chunk_overlap = int(chunking.get("overlap", cfg.chunk_overlap))

        retry = data.get("retry", {})
        cfg.max_retries = int(retry.get("max_retries", cfg.max_retries))
        cfg.backoff_base_ms = int(retry.get("backoff_base_ms", cfg.backoff_base_ms))

        rate = data.get("rate_limit", {})
        cfg.rate_requests_per_window = int(
            rate.get("requests_per_window", cfg.rate_requests_per_window))
        cfg.rate_window_s = float(rate.get("window_s", cfg.rate_window_s))

        provider = data.get("provider", {})
        pc = ProviderConfig()
        pc.kind = provider.get("kind", pc.kind)
        pc.budget_tokens = int(provider.get("budget_tokens", pc.budget_tokens))
        pc.chars_per_token = float(provider.get("chars_per_token", pc.chars_per_token))
        pc.base_url = provider.get("base_url", pc.base_url)
        pc.embed_dimension = int(provider.get("embed_dimension", pc.embed_dimension))
        pc.temperature = float(provider.get("temperature", pc.temperature))
        script = provider.get("script")
        if script:
            script_path = Path(script)
            pc.script = str(script_path if script_path.is_absolute()
                            else (base / script_path))
        pc.chat_model = provider.get("chat", {}).get("model", pc.chat_model)
        pc.embed_model = provider.get("embed", {}).get("model", pc.embed_model)
        cfg.provider = pc

        scholar = data.get("scholar", {})
        sc = ScholarConfig()
        sc.base_url = scholar.get("base_url", sc.base_url)
        sc.min_interval_s = float(scholar.get("min_interval_s", sc.min_interval_s))
        sc.seeds_per_idea = int(scholar.get("seeds_per_idea", sc.seeds_per_idea))
        cfg.scholar = sc

        for name, raw in data.get("sources", {}).items():
            cfg.sources[name] = ConferenceSource(
                name=name,
                listing_url=raw["listing_url"],
                link_hop_rules=tuple(raw.get("link_hop_rules", [])),
                review_site=raw.get("review_site"),
            )
        return cfg

    @classmethod
    def load(cls, path: Path | str | None) -> "AppConfig":
        if path is None:
            return cls()
        path = Path(path)
        with open(path, "rb") as fh:
            data = tomllib.load(fh)
        return cls.from_dict(data, base_dir=path.parent)
