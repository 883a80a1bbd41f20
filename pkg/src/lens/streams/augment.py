"""Frame augmentation: crop, scale/aspect jitter, resize, channel normalization."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lens.videoio.clips import Frame

# measured on the synthetic low-light corpus (seed-averaged)
SPATIAL_MEAN = (0.05, 0.05, 0.05)
SPATIAL_STD = (0.10, 0.10, 0.10)


@dataclass(frozen=True)
class AugmentConfig:
    crop_min: float = 0.8
    crop_max: float = 1.0
    out_size: int = 64
    mean: tuple[float, float, float] = SPATIAL_MEAN
    std: tuple[float, float, float] = SPATIAL_STD
    scale_jitter: tuple[float, float] = (0.9, 1.1)
    aspect_jitter: tuple[float, float] = (0.9, 1.1)

    def __post_init__(self):
        if not 0.0 < self.crop_min <= self.crop_max <= 1.0:
            raise ValueError("crop fractions must satisfy 0 < min <= max <= 1")
        if any(s <= 0 for s in self.std):
            raise ValueError("std must be positive")


IDENTITY_AUGMENT = AugmentConfig(
    crop_min=1.0, crop_max=1.0, mean=(0.0, 0.0, 0.0), std=(1.0, 1.0, 1.0),
    scale_jitter=(1.0, 1.0), aspect_jitter=(1.0, 1.0),
)

# mild jitter keeps the train and test-time distributions close; the desk
# dataset is small enough that heavy augmentation starves memorization
DESK_AUGMENT = AugmentConfig(
    crop_min=0.95, crop_max=1.0,
    scale_jitter=(0.98, 1.02), aspect_jitter=(0.98, 1.02),
)


def _resize_plane(img: np.ndarray, nh: int, nw: int) -> np.ndarray:
    h, w = img.shape
    ys = np.linspace(0, h - 1, nh)
    xs = np.linspace(0, w - 1, nw)
    y0 = np.floor(ys).astype(np.intp)
    x0 = np.floor(xs).astype(np.intp)
    y1 = np.minimum(y0 + 1, h - 1)
    x1 = np.minimum(x0 + 1, w - 1)
    fy = (ys - y0)[:, None]
    fx = (xs - x0)[None, :]
    top = img[np.ix_(y0, x0)] * (1 - fx) + img[np.ix_(y0, x1)] * fx
    bot = img[np.ix_(y1, x0)] * (1 - fx) + img[np.ix_(y1, x1)] * fx
    return top * (1 - fy) + bot * fy


def resize_chw(x: np.ndarray, size: int) -> np.ndarray:
    if x.shape[1] == size and x.shape[2] == size:
        return x
    return np.stack([_resize_plane(plane, size, size) for plane in x])


def _normalize(x: np.ndarray, mean, std) -> np.ndarray:
    mean = np.asarray(mean, dtype=np.float64)[:, None, None]
    std = np.asarray(std, dtype=np.float64)[:, None, None]
    return (x - mean) / std


def _crop_geometry(h: int, w: int, cfg: AugmentConfig, rng: np.random.Generator):
    frac = rng.uniform(cfg.crop_min, cfg.crop_max)
    scale = rng.uniform(*cfg.scale_jitter)
    aspect = rng.uniform(*cfg.aspect_jitter)
    side = min(h, w) * frac * scale
    cw = int(round(min(side * np.sqrt(aspect), w)))
    ch = int(round(min(side / np.sqrt(aspect), h)))
    cw, ch = max(cw, 2), max(ch, 2)
    if cw > w or ch > h:
        raise ValueError("crop larger than frame")
    x0 = int(rng.integers(0, w - cw + 1))
    y0 = int(rng.integers(0, h - ch + 1))
    return x0, y0, cw, ch


def augment(frame: Frame, cfg: AugmentConfig, rng: np.random.Generator) -> np.ndarray:
    """Training-time transform: random crop/jitter, resize, normalize -> [3, S, S]."""
    x = frame.pixels.astype(np.float64) / 255.0
    x0, y0, cw, ch = _crop_geometry(frame.height, frame.width, cfg, rng)
    cropped = x[y0 : y0 + ch, x0 : x0 + cw, :].transpose(2, 0, 1)
    return _normalize(resize_chw(cropped, cfg.out_size), cfg.mean, cfg.std)


def eval_transform(frame: Frame, cfg: AugmentConfig) -> np.ndarray:
    """Test-time transform: center crop at crop_max, resize, normalize."""
    x = frame.pixels.astype(np.float64) / 255.0
    h, w = frame.height, frame.width
    side = int(round(min(h, w) * cfg.crop_max))
    y0 = (h - side) // 2
    x0 = (w - side) // 2
    cropped = x[y0 : y0 + side, x0 : x0 + side, :].transpose(2, 0, 1)
    return _normalize(resize_chw(cropped, cfg.out_size), cfg.mean, cfg.std)
