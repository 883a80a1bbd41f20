"""Stacked flow tensors: the temporal stream's input."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .tvl1 import FlowField

DEFAULT_STACK_LEN = 10
# displacements are clipped here before 8-bit discretization; desk-scale
# scenes move by fractions of a pixel, so a wide range would quantize the
# whole signal onto one or two levels
FLOW_CLAMP_PX = 4.0


@dataclass
class StackedFlow:
    """2L interleaved planes: u1, v1, u2, v2, ..., shape (2L, H, W)."""

    planes: np.ndarray

    def __post_init__(self):
        if self.planes.ndim != 3 or self.planes.shape[0] % 2 != 0:
            raise ValueError("expected (2L, H, W) planes")

    @property
    def length(self) -> int:
        return self.planes.shape[0] // 2

    @property
    def width(self) -> int:
        return self.planes.shape[2]

    @property
    def height(self) -> int:
        return self.planes.shape[1]

    def flow(self, i: int) -> FlowField:
        return FlowField(u=self.planes[2 * i].copy(), v=self.planes[2 * i + 1].copy())


def stack_flows(flows: Sequence[FlowField]) -> StackedFlow:
    """Interleave L consecutive flow fields into a 2L-plane stack."""
    if not flows:
        raise ValueError("cannot stack zero flows")
    shape = flows[0].u.shape
    for f in flows:
        if f.u.shape != shape:
            raise ValueError("all flows in a stack must share dimensions")
    planes = np.empty((2 * len(flows), *shape), dtype=np.float64)
    for i, f in enumerate(flows):
        planes[2 * i] = f.u
        planes[2 * i + 1] = f.v
    return StackedFlow(planes=planes)


def stack_to_input(stack: StackedFlow) -> np.ndarray:
    """Discretize a stack for the temporal stream.

    Displacements are clipped to +/-FLOW_CLAMP_PX, mapped linearly onto
    [0, 255] and rounded (zero flow lands mid-scale), matching how stacked
    flow is conventionally stored as 8-bit images.
    """
    clipped = np.clip(stack.planes, -FLOW_CLAMP_PX, FLOW_CLAMP_PX)
    scaled = (clipped + FLOW_CLAMP_PX) * (255.0 / (2.0 * FLOW_CLAMP_PX))
    return np.rint(scaled)


def zero_stack(length: int, height: int, width: int) -> StackedFlow:
    return StackedFlow(planes=np.zeros((2 * length, height, width)))
