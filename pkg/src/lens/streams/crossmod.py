"""Cross-modality first-layer initialization for the temporal stream."""
from __future__ import annotations

import numpy as np


def cross_modality_init(spatial_first_layer: np.ndarray, target_channels: int) -> np.ndarray:
    """Average a trained [F, 3, k, k] spatial conv over RGB and replicate the
    mean to all ``target_channels`` flow channels -> [F, 2L, k, k]."""
    if spatial_first_layer.ndim != 4:
        raise ValueError("expected a [F, C, k, k] convolution weight")
    if target_channels < 1:
        raise ValueError("target channel count must be >= 1")
    mean = spatial_first_layer.mean(axis=1, keepdims=True)
    return np.repeat(mean, target_channels, axis=1)
