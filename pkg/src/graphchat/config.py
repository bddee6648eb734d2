"""TOML configuration with environment overrides.

Every CLI flag has a counterpart here; explicit flags win over the file,
and ``GRAPHCHAT_<SECTION>__<KEY>`` environment variables win over both.
"""

from __future__ import annotations

import os
import sys
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

ENV_PREFIX = "GRAPHCHAT_"

DEFAULTS: dict[str, dict[str, Any]] = {
    "corpus": {
        "dir": "corpus",
        "manifest": "",
        "chunk_size": 1200,
        "overlap": 100,
        "code_patterns": ["codes.md", "*.py"],
        "qa_file": "",
    },
    "provider": {
        "kind": "mock",
        "base_url": "http://localhost:1234/v1",
        "api_key": "",
        "chat_model_id": "codestral-22b",
        "embed_model_id": "nomic-embed-text-v1.5",
        "timeout": 60.0,
        "max_retries": 2,
        "max_concurrency": 4,
        "trace_path": "",
        "mock_seed": 0,
        "mock_dim": 64,
        "mock_script": "",
    },
    "engine": {
        "top_k_entities": 5,
        "top_k_chunks": 5,
        "entity_threshold": 0.75,
        "chunk_threshold": 0.75,
        "faq_threshold": 0.75,
        "context_budget": 8000,
        "history_window": 5,
        "map_batch_size": 10,
    },
    "graph": {
        "gleanings": 2,
        "resolution": 1.0,
        "seed": 0,
        "max_levels": 4,
        "report_levels": [0, 1],
        "summary_budget": 1500,
    },
    "bench": {
        "repetitions": 3,
        "temperature": 0.1,
        "workers": 4,
    },
    "service": {
        "host": "127.0.0.1",
        "port": 8000,
        "artifacts_dir": "out",
        "usage_log": "usage.jsonl",
        "sessions_db": "sessions.db",
        "session_ttl_hours": 24,
        "debug": False,
        "rate_capacity": 30,
        "rate_refill_per_s": 10.0,
    },
}


@dataclass
class Config:
    values: dict[str, dict[str, Any]] = field(default_factory=dict)

    def get(self, section: str, key: str) -> Any:
        return self.values[section][key]

    def section(self, name: str) -> dict[str, Any]:
        return dict(self.values[name])


def _coerce(raw: str, like: Any) -> Any:
    if isinstance(like, bool):
        return raw.strip().lower() in ("1", "true", "yes", "on")
    if isinstance(like, int):
        return int(raw)
    if isinstance(like, float):
        return float(raw)
    if isinstance(like, list):
        return [part.strip() for part in raw.split(",") if part.strip()]
    return raw


def load_config(path: str | Path | None = None, env: dict[str, str] | None = None) -> Config:
    """Defaults <- TOML file <- GRAPHCHAT_SECTION__KEY environment overrides."""
    values: dict[str, dict[str, Any]] = {s: dict(kv) for s, kv in DEFAULTS.items()}
    if path:
        with open(path, "rb") as fh:
            loaded = tomllib.load(fh)
        for section, kv in loaded.items():
            if section not in values:
                values[section] = {}
            if not isinstance(kv, dict):
                raise ValueError(f"config section [{section}] must be a table")
            values[section].update(kv)

    environ = env if env is not None else os.environ
    for name, raw in environ.items():
        if not name.startswith(ENV_PREFIX) or "__" not in name:
            continue
        section, _, key = name[len(ENV_PREFIX) :].partition("__")
        section, key = section.lower(), key.lower()
        if section in values and key in values[section]:
            values[section][key] = _coerce(raw, values[section][key])
        else:
            values.setdefault(section, {})[key] = raw
    return Config(values=values)
