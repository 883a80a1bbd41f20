"""`.lflo` flow dump format: magic, dimensions, f32 u-plane then v-plane."""
from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .tvl1 import FlowField

LFLO_MAGIC = b"LFLO"
_HEADER = struct.Struct("<4sHH")


class FlowFormatError(ValueError):
    pass


def save_flow(flow: FlowField, path: str | Path) -> None:
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(LFLO_MAGIC, flow.width, flow.height))
        fh.write(flow.u.astype("<f4").tobytes())
        fh.write(flow.v.astype("<f4").tobytes())


def load_flow(path: str | Path) -> FlowField:
    data = Path(path).read_bytes()
    if len(data) < _HEADER.size:
        raise FlowFormatError("truncated header")
    magic, width, height = _HEADER.unpack_from(data, 0)
    if magic != LFLO_MAGIC:
        raise FlowFormatError(f"bad magic {magic!r}")
    plane = width * height * 4
    if len(data) != _HEADER.size + 2 * plane:
        raise FlowFormatError("payload size mismatch")
    u = np.frombuffer(data, dtype="<f4", count=width * height, offset=_HEADER.size)
    v = np.frombuffer(data, dtype="<f4", count=width * height, offset=_HEADER.size + plane)
    return FlowField(
        u=u.reshape(height, width).astype(np.float64),
        v=v.reshape(height, width).astype(np.float64),
    )
