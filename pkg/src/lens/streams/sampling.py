"""Segment sampling and consensus aggregation of per-frame predictions."""
from __future__ import annotations

import numpy as np


def segment_windows(length: int, n: int) -> list[tuple[int, int]]:
    """Partition [0, length) into n equal-as-possible windows."""
    edges = [length * i // n for i in range(n + 1)]
    return [(edges[i], edges[i + 1]) for i in range(n)]


def sample_segment_frames(length: int, n: int, rng: np.random.Generator) -> list[int]:
    """One uniform frame index per equally spaced temporal window."""
    if length < n:
        raise ValueError(f"clip of {length} frames is too short for {n} segments")
    return [int(rng.integers(lo, hi)) for lo, hi in segment_windows(length, n)]


def center_segment_frames(length: int, n: int) -> list[int]:
    """Deterministic window centers (test-time sampling)."""
    if length < n:
        raise ValueError(f"clip of {length} frames is too short for {n} segments")
    return [(lo + hi) // 2 for lo, hi in segment_windows(length, n)]


def segmental_consensus(scores: list[np.ndarray] | np.ndarray) -> np.ndarray:
    """Elementwise average of probability vectors, renormalized."""
    arr = np.asarray(scores, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[None]
    if arr.shape[0] == 0:
        raise ValueError("consensus of zero score vectors")
    mean = arr.mean(axis=0)
    total = mean.sum()
    if total <= 0:
        raise ValueError("consensus input does not form a distribution")
    return mean / total
