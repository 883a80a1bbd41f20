"""Debounced threshold detection over the fused score stream."""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field

from lens.videoio.clips import ActionLabel

from .scorer import ScoreTriple

DEFAULT_COOLDOWN_MS = 5000


@dataclass
class Detection:
    label: ActionLabel
    confidence: float
    frame_index: int
    timestamp_ms: int
    scores: ScoreTriple


@dataclass
class DetectionState:
    window_size: int = 3
    cooldown_ms: int = DEFAULT_COOLDOWN_MS
    # frames to ignore at stream start, while the flow stack still carries
    # zero-padding and the temporal stream sees phantom stillness
    warmup_frames: int = 0
    window: deque = field(default_factory=deque)
    last_fire_ms: int | None = None
    frames_seen: int = 0

    def __post_init__(self):
        if self.window_size < 1:
            raise ValueError("debounce window must be >= 1")
        self.window = deque(self.window, maxlen=self.window_size)


def detect(
    state: DetectionState, scores: ScoreTriple, threshold: float, now_ms: int
) -> Detection | None:
    """Push one fused prediction; fire when the whole window agrees on the
    same non-NoAction label with confidence >= threshold and the cooldown
    has elapsed. Firing resets the window."""
    state.frames_seen += 1
    if state.frames_seen <= state.warmup_frames:
        return None
    state.window.append((scores.label, scores.confidence, scores))
    if len(state.window) < state.window.maxlen:
        return None
    labels = {label for label, _, _ in state.window}
    if len(labels) != 1:
        return None
    label = labels.pop()
    if label == int(ActionLabel.NO_ACTION):
        return None
    if any(conf < threshold for _, conf, _ in state.window):
        return None
    if state.last_fire_ms is not None and now_ms - state.last_fire_ms < state.cooldown_ms:
        return None
    state.last_fire_ms = now_ms
    latest = state.window[-1][2]
    state.window.clear()
    return Detection(
        label=ActionLabel(label),
        confidence=latest.confidence,
        frame_index=latest.frame_index,
        timestamp_ms=now_ms,
        scores=latest,
    )
