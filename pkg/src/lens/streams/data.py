"""Adapters feeding clips and precomputed flow stacks to the trainer.

The temporal stream runs on flows computed at half frame resolution with the
fast solver preset, and those flows are precomputed per clip (training
samples many stack positions from the same clip, and the live pipeline must
see the exact same preprocessing).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from lens.optflow.stack import FLOW_CLAMP_PX
from lens.optflow.tvl1 import Tvl1Params, downscale, to_gray, tvl1_flow_gray
from lens.videoio.clips import Clip, Frame

from .augment import AugmentConfig, augment, eval_transform
from .sampling import center_segment_frames, sample_segment_frames

FLOW_SCALE = 0.5
# slightly data-heavy preset: the default lambda squashes the motion of the
# small desk-scale actors, while a large one chases sensor noise
FLOW_PARAMS = Tvl1Params(lam=0.3, warps=3, iters=20, levels=2)
DEFAULT_STACK_LEN = 10

TEMPORAL_MEAN = 0.5
TEMPORAL_STD = 0.05


def flow_gray(frame: Frame, scale: float = FLOW_SCALE) -> np.ndarray:
    """Luminance plane downscaled for flow computation."""
    gray = to_gray(frame)
    return downscale(gray, scale) if scale != 1.0 else gray


def clip_flow_planes(
    clip: Clip, params: Tvl1Params = FLOW_PARAMS, scale: float = FLOW_SCALE
) -> np.ndarray:
    """Flows between consecutive frames as a [n_pairs, 2, h, w] float32 array."""
    grays = [flow_gray(f, scale) for f in clip.frames]
    planes = np.empty(
        (len(grays) - 1, 2, grays[0].shape[0], grays[0].shape[1]), dtype=np.float32
    )
    for i in range(len(grays) - 1):
        flow = tvl1_flow_gray(grays[i], grays[i + 1], params)
        planes[i, 0] = flow.u
        planes[i, 1] = flow.v
    return planes


def cached_flow_planes(clip_path: str | Path, clip: Clip, cache_dir: str | Path) -> np.ndarray:
    """Disk-cached version of :func:`clip_flow_planes` keyed by file name."""
    cache_dir = Path(cache_dir)
    cache_dir.mkdir(parents=True, exist_ok=True)
    stem = Path(clip_path).stem
    label = clip.label.wire_name if clip.label is not None else "unlabeled"
    cache_file = cache_dir / f"{label}_{stem}.npz"
    if cache_file.exists():
        return np.load(cache_file)["planes"]
    planes = clip_flow_planes(clip)
    np.savez_compressed(cache_file, planes=planes)
    return planes


def temporal_input(planes: np.ndarray) -> np.ndarray:
    """Discretize and normalize [L, 2, h, w] flow planes into a [2L, h, w] input."""
    length = planes.shape[0]
    stacked = planes.reshape(2 * length, *planes.shape[2:]).astype(np.float64)
    clipped = np.clip(stacked, -FLOW_CLAMP_PX, FLOW_CLAMP_PX)
    discrete = np.rint((clipped + FLOW_CLAMP_PX) * (255.0 / (2.0 * FLOW_CLAMP_PX)))
    return (discrete / 255.0 - TEMPORAL_MEAN) / TEMPORAL_STD


@dataclass
class SpatialVideo:
    clip: Clip
    label: int
    cfg: AugmentConfig = field(default_factory=AugmentConfig)
    n_frames: int = 3

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        indices = sample_segment_frames(len(self.clip), self.n_frames, rng)
        return np.stack([augment(self.clip.frames[i], self.cfg, rng) for i in indices])

    def eval_input(self) -> np.ndarray:
        indices = center_segment_frames(len(self.clip), self.n_frames)
        return np.stack([eval_transform(self.clip.frames[i], self.cfg) for i in indices])


@dataclass
class TemporalVideo:
    planes: np.ndarray  # [n_pairs, 2, h, w]
    label: int
    stack_len: int = DEFAULT_STACK_LEN

    def __post_init__(self):
        if self.planes.shape[0] < self.stack_len:
            raise ValueError(
                f"clip has {self.planes.shape[0]} flow pairs, "
                f"need at least {self.stack_len}"
            )

    def draw(self, rng: np.random.Generator) -> np.ndarray:
        start = int(rng.integers(0, self.planes.shape[0] - self.stack_len + 1))
        return temporal_input(self.planes[start : start + self.stack_len])[None]

    def eval_input(self) -> np.ndarray:
        # consensus over three evenly placed stacks covers all motion phases
        last = self.planes.shape[0] - self.stack_len
        starts = sorted({0, last // 2, last})
        return np.stack(
            [temporal_input(self.planes[s : s + self.stack_len]) for s in starts]
        )
