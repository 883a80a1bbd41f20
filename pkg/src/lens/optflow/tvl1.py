"""Coarse-to-fine TV-L1 dense optical flow.

The solver minimizes a total-variation regularized L1 data term with the
duality-based scheme: an image pyramid is built, and at each level the
level solver alternates a pointwise thresholding step with dual-ascent TV
denoising, warping the second image a few times per level. A 3x3 median
filter is applied to the flow between warps.

The flow convention is forward motion: content at (x, y) in ``prev``
appears at (x + u, y + v) in ``next``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from lens.videoio.clips import Frame

from . import backend
from ._tvl1_numpy import forward_gradient

# luminance arrives in [0, 1]; the classical parameter values assume a
# [0, 255] intensity scale, so the solver works in scaled units
INTENSITY_SCALE = 255.0

# ITU-R BT.601 luma weights
_LUMA = np.array([0.299, 0.587, 0.114])


@dataclass(frozen=True)
class Tvl1Params:
    lam: float = 0.15
    theta: float = 0.3
    tau: float = 0.25
    warps: int = 5
    iters: int = 30
    pyramid_scale: float = 0.5
    levels: int | None = None  # None: floor(log2(min_dim / 16)), at least 1

    def __post_init__(self):
        if self.tau > 0.25:
            raise ValueError("tau must be <= 0.25 for dual-ascent stability")
        if not 0.0 < self.pyramid_scale < 1.0:
            raise ValueError("pyramid_scale must lie in (0, 1)")
        for name in ("warps", "iters"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.levels is not None and self.levels < 1:
            raise ValueError("levels must be >= 1")

    def levels_for(self, width: int, height: int) -> int:
        if self.levels is not None:
            return self.levels
        return max(1, int(math.floor(math.log2(min(width, height) / 16.0))))


# tuned for pipeline throughput rather than benchmark accuracy
FAST_PARAMS = Tvl1Params(warps=2, iters=12, levels=2)


@dataclass
class FlowField:
    """Per-pixel displacement planes, in pixels."""

    u: np.ndarray
    v: np.ndarray
    energies: list[float] = field(default_factory=list, repr=False, compare=False)

    def __post_init__(self):
        if self.u.shape != self.v.shape:
            raise ValueError("u and v planes must share a shape")
        if not (np.isfinite(self.u).all() and np.isfinite(self.v).all()):
            raise ValueError("flow planes must be finite")

    @property
    def width(self) -> int:
        return self.u.shape[1]

    @property
    def height(self) -> int:
        return self.u.shape[0]

    @property
    def magnitude(self) -> np.ndarray:
        return np.hypot(self.u, self.v)


def to_gray(frame: Frame | np.ndarray) -> np.ndarray:
    """Luminance plane in [0, 1] (BT.601 weights)."""
    pixels = frame.pixels if isinstance(frame, Frame) else frame
    if pixels.ndim == 2:
        arr = pixels.astype(np.float64)
        return arr / 255.0 if pixels.dtype == np.uint8 else arr
    return (pixels.astype(np.float64) @ _LUMA) / 255.0


def _bilinear_grid(img: np.ndarray, ys: np.ndarray, xs: np.ndarray) -> np.ndarray:
    h, w = img.shape
    x0 = np.floor(xs).astype(np.intp)
    y0 = np.floor(ys).astype(np.intp)
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    fx = xs - x0
    fy = ys - y0
    top = img[y0, x0] * (1 - fx) + img[y0, x1] * fx
    bot = img[y1, x0] * (1 - fx) + img[y1, x1] * fx
    return top * (1 - fy) + bot * fy


def _resize(img: np.ndarray, nh: int, nw: int) -> np.ndarray:
    ys = np.linspace(0, img.shape[0] - 1, nh)
    xs = np.linspace(0, img.shape[1] - 1, nw)
    gy, gx = np.meshgrid(ys, xs, indexing="ij")
    return _bilinear_grid(img, gy, gx)


def downscale(img: np.ndarray, scale: float) -> np.ndarray:
    """Anti-aliased downscale of a luminance plane."""
    sigma = 0.6 * math.sqrt(1.0 / scale**2 - 1.0)
    smoothed = ndimage.gaussian_filter(img, sigma=sigma, mode="nearest")
    h, w = img.shape
    return _resize(smoothed, max(int(round(h * scale)), 4), max(int(round(w * scale)), 4))


def tvl1_energy(
    i0: np.ndarray, i1: np.ndarray, u: np.ndarray, v: np.ndarray, lam: float
) -> float:
    """True (non-linearized) TV-L1 objective of a candidate flow."""
    i1w = backend.warp_bilinear(np.ascontiguousarray(i1), u, v)
    ux, uy = forward_gradient(u)
    vx, vy = forward_gradient(v)
    tv = np.hypot(ux, uy).sum() + np.hypot(vx, vy).sum()
    data = np.abs(i1w - i0).sum()
    return float(tv + lam * data)


def tvl1_flow_gray(
    prev: np.ndarray, next_: np.ndarray, params: Tvl1Params = Tvl1Params()
) -> FlowField:
    """TV-L1 flow between two [0, 1] luminance planes."""
    if prev.shape != next_.shape:
        raise ValueError("frame dimensions must match")
    h, w = prev.shape
    n_levels = params.levels_for(w, h)
    if min(h, w) < 2**n_levels:
        raise ValueError(f"frames of size {w}x{h} are too small for {n_levels} levels")

    i0 = np.ascontiguousarray(prev, dtype=np.float64) * INTENSITY_SCALE
    i1 = np.ascontiguousarray(next_, dtype=np.float64) * INTENSITY_SCALE
    pyramid = [(i0, i1)]
    for _ in range(n_levels - 1):
        a, b = pyramid[-1]
        pyramid.append(
            (downscale(a, params.pyramid_scale), downscale(b, params.pyramid_scale))
        )

    ch, cw = pyramid[-1][0].shape
    u = np.zeros((ch, cw))
    v = np.zeros((ch, cw))
    energies: list[float] = []
    for level in range(n_levels - 1, -1, -1):
        a, b = pyramid[level]
        lh, lw = a.shape
        if u.shape != (lh, lw):
            scale_x = lw / u.shape[1]
            scale_y = lh / u.shape[0]
            u = np.ascontiguousarray(_resize(u, lh, lw) * scale_x)
            v = np.ascontiguousarray(_resize(v, lh, lw) * scale_y)
        if level > 0:
            u, v = backend.solve_level(
                a, b, u, v, params.lam, params.theta, params.tau,
                params.warps, params.iters,
            )
            continue
        # finest level: evaluate the true objective warp by warp and keep
        # the best flow seen, so the reported energies are non-increasing
        best_u, best_v = u, v
        best = tvl1_energy(a, b, u, v, params.lam)
        for warp_idx in range(params.warps):
            u, v = backend.solve_level(
                a, b, u, v, params.lam, params.theta, params.tau, 1, params.iters
            )
            if (e := tvl1_energy(a, b, u, v, params.lam)) <= best:
                best, best_u, best_v = e, u, v
            energies.append(best)
            if warp_idx < params.warps - 1:
                u = np.ascontiguousarray(backend.median3x3(u))
                v = np.ascontiguousarray(backend.median3x3(v))
        u, v = best_u, best_v
    return FlowField(u=np.asarray(u), v=np.asarray(v), energies=energies)


def tvl1_flow(prev: Frame, next_: Frame, params: Tvl1Params = Tvl1Params()) -> FlowField:
    """Dense optical flow between two frames of equal size."""
    if (prev.width, prev.height) != (next_.width, next_.height):
        raise ValueError("frame dimensions must match")
    return tvl1_flow_gray(to_gray(prev), to_gray(next_), params)
