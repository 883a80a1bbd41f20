"""Evaluation artifacts: confusion matrices, per-class percent change of
correct counts under fusion, and precision/recall sweeps."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from lens.videoio.clips import ActionLabel

N_CLASSES = 4


@dataclass
class ConfusionMatrix:
    counts: np.ndarray  # [4, 4], rows = truth, cols = prediction

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=np.int64)
        if self.counts.shape != (N_CLASSES, N_CLASSES):
            raise ValueError("confusion matrix must be 4x4")
        if (self.counts < 0).any():
            raise ValueError("counts must be non-negative")

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def accuracy(self) -> float:
        if self.total == 0:
            raise ValueError("accuracy of an empty confusion matrix is undefined")
        return float(np.trace(self.counts)) / self.total

    def per_class_correct(self) -> np.ndarray:
        return np.diag(self.counts).copy()

    def to_lists(self) -> list[list[int]]:
        return self.counts.tolist()


def confusion_matrix(truths, predictions) -> ConfusionMatrix:
    truths = np.asarray(truths, dtype=np.int64)
    predictions = np.asarray(predictions, dtype=np.int64)
    if truths.shape != predictions.shape:
        raise ValueError("truth and prediction sequences must have equal length")
    counts = np.zeros((N_CLASSES, N_CLASSES), dtype=np.int64)
    for t, p in zip(truths, predictions):
        counts[t, p] += 1
    return ConfusionMatrix(counts=counts)


def percent_change(stream_correct, fused_correct) -> list[float]:
    """Per-class percent change of correct counts, stream -> fused.

    A stream with zero correct answers improved to a nonzero count is
    reported as +infinity (0 -> 0 is 0%).
    """
    stream = np.asarray(stream_correct, dtype=np.int64)
    fused = np.asarray(fused_correct, dtype=np.int64)
    if stream.shape != fused.shape:
        raise ValueError("per-class counts must align")
    if (stream < 0).any() or (fused < 0).any():
        raise ValueError("counts must be non-negative")
    out = []
    for s, f in zip(stream, fused):
        if s == 0:
            out.append(0.0 if f == 0 else float("inf"))
        else:
            out.append(100.0 * (f - s) / s)
    return out


def percent_change_table(
    spatial: ConfusionMatrix, temporal: ConfusionMatrix, fused: ConfusionMatrix
) -> dict[str, list[float]]:
    """Rows 'spatial' and 'temporal': percent change of per-class correct
    counts relative to the fused classifier."""
    fused_correct = fused.per_class_correct()
    return {
        "spatial": percent_change(spatial.per_class_correct(), fused_correct),
        "temporal": percent_change(temporal.per_class_correct(), fused_correct),
    }


def class_names() -> list[str]:
    return [label.wire_name for label in ActionLabel]


def pr_points(
    scored_events: list[tuple[float, bool]], thresholds
) -> list[dict[str, float]]:
    """Precision/recall at each threshold; an event fires when its
    confidence is >= the threshold.

    With zero alerts, precision is reported as 1.0 and flagged.
    """
    if not any(is_true for _, is_true in scored_events):
        raise ValueError("precision/recall needs at least one positive example")
    points = []
    n_pos = sum(1 for _, is_true in scored_events if is_true)
    for t in thresholds:
        tp = sum(1 for conf, is_true in scored_events if conf >= t and is_true)
        fp = sum(1 for conf, is_true in scored_events if conf >= t and not is_true)
        alerts = tp + fp
        points.append(
            {
                "threshold": float(t),
                "precision": tp / alerts if alerts else 1.0,
                "recall": tp / n_pos,
                "alerts": float(alerts),
                "zero_alerts": float(alerts == 0),
            }
        )
    return points
