"""Relay configuration: bind address, storage root, static token registry."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from pathlib import Path

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


@dataclass(frozen=True)
class TokenEntry:
    token: str
    role: str  # "edge" | "authority" | "civilian"
    user_id: str
    lat: float | None = None
    lon: float | None = None


@dataclass
class RelayConfig:
    host: str = "127.0.0.1"
    port: int = 8080
    infer_port: int = 8765
    storage: str = "relay-data"
    threshold: float = 0.5
    tokens: list[TokenEntry] = field(default_factory=list)
    spatial_model: str | None = None
    temporal_model: str | None = None
    svm_model: str | None = None
    clock_skew_ms: int = 60_000

    def __post_init__(self):
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError("threshold must lie in [0, 1]")


def load_relay_config(path: str | Path) -> RelayConfig:
    raw = tomllib.loads(Path(path).read_text())
    tokens = [TokenEntry(**entry) for entry in raw.pop("tokens", [])]
    return RelayConfig(tokens=tokens, **raw)
