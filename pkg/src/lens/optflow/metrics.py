"""Flow accuracy metric."""
from __future__ import annotations

import numpy as np

from .tvl1 import FlowField


def endpoint_error(estimate: FlowField, truth: FlowField) -> float:
    """Mean Euclidean distance between estimated and true displacement."""
    if estimate.u.shape != truth.u.shape:
        raise ValueError("flow dimensions must match")
    return float(np.hypot(estimate.u - truth.u, estimate.v - truth.v).mean())
