"""Color-wheel flow visualization: hue encodes direction, saturation magnitude."""
from __future__ import annotations

import colorsys

import numpy as np

from lens.videoio.clips import Frame

from .tvl1 import FlowField


def flow_colorize(flow: FlowField) -> Frame:
    """Render a flow field as an RGB frame.

    Hue is atan2(v, u); saturation is the magnitude normalized by the field's
    99th-percentile magnitude (so the mapping is scale-free per field); value
    stays at 1, making zero flow white.
    """
    mag = flow.magnitude
    norm = np.percentile(mag, 99)
    sat = np.clip(mag / norm, 0.0, 1.0) if norm > 0 else np.zeros_like(mag)
    hue = (np.arctan2(flow.v, flow.u) / (2.0 * np.pi)) % 1.0

    h, w = mag.shape
    rgb = np.empty((h, w, 3), dtype=np.float64)
    # hsv -> rgb, vectorized for s in [0,1], v = 1
    i = np.floor(hue * 6.0).astype(int) % 6
    f = hue * 6.0 - np.floor(hue * 6.0)
    p = 1.0 - sat
    q = 1.0 - sat * f
    t = 1.0 - sat * (1.0 - f)
    ones = np.ones_like(hue)
    lut = [
        (ones, t, p),
        (q, ones, p),
        (p, ones, t),
        (p, q, ones),
        (t, p, ones),
        (ones, p, q),
    ]
    for k, (r, g, b) in enumerate(lut):
        mask = i == k
        rgb[mask, 0] = r[mask]
        rgb[mask, 1] = g[mask]
        rgb[mask, 2] = b[mask]
    pixels = np.clip(np.rint(rgb * 255.0), 0, 255).astype(np.uint8)
    return Frame(width=w, height=h, pixels=pixels, index=0, timestamp_ms=0)


def hue_of(color: np.ndarray) -> float:
    """Hue in degrees of one RGB triple (test helper)."""
    r, g, b = (float(c) / 255.0 for c in color)
    return colorsys.rgb_to_hsv(r, g, b)[0] * 360.0
