"""Edge agent configuration."""
from __future__ import annotations

import sys
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

from lens.videoio.throughput import SkipPolicy

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib


class InferenceMode(str, Enum):
    EDGE = "edge"
    CLOUD = "cloud"


@dataclass
class EdgeConfig:
    camera_id: str = "cam-0"
    lat: float = 0.0
    lon: float = 0.0
    mode: InferenceMode = InferenceMode.EDGE
    skip: SkipPolicy = field(default_factory=SkipPolicy)
    threshold: float = 0.5
    debounce_window: int = 3
    cooldown_ms: int = 5000
    relay_url: str = "http://127.0.0.1:8080"
    infer_host: str = "127.0.0.1"
    infer_port: int = 8765
    auth_token: str = ""
    spatial_model: str = "spatial.lmdl"
    temporal_model: str = "temporal.lmdl"
    svm_model: str = "fusion.lsvm"
    spool_dir: str = "spool"
    queue_capacity: int = 8
    reduced: bool = False  # halve resolution before the flow front end

    def __post_init__(self):
        self.threshold = min(max(self.threshold, 0.0), 1.0)
        if self.debounce_window < 1:
            raise ValueError("debounce window must be >= 1")


def load_edge_config(path: str | Path) -> EdgeConfig:
    raw = tomllib.loads(Path(path).read_text())
    gps = raw.pop("gps", None)
    if gps is not None:
        raw["lat"], raw["lon"] = float(gps[0]), float(gps[1])
    if "mode" in raw:
        raw["mode"] = InferenceMode(raw["mode"])
    if "skip" in raw:
        raw["skip"] = SkipPolicy(skip=int(raw["skip"]))
    return EdgeConfig(**raw)
