"""Per-frame scoring state machine shared by edge and cloud inference.

For each processed frame: flow against the previous processed frame is
pushed into a sliding stack (zero-initialized at stream start), the spatial
stream sees the frame, the temporal stream sees the stack, and the SVM
fuses both softmax vectors. Batch evaluation and the live pipeline use the
same instance type, so their outputs are identical by construction; the
equivalence tests check that the threading adds no hidden state.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from lens.fusion.smo import SvmModel, svm_scores
from lens.optflow.tvl1 import Tvl1Params, tvl1_flow_gray
from lens.streams.augment import AugmentConfig, eval_transform
from lens.streams.data import (
    DEFAULT_STACK_LEN,
    FLOW_PARAMS,
    FLOW_SCALE,
    flow_gray,
    temporal_input,
)
from lens.streams.model import StreamModel, forward
from lens.videoio.clips import Frame


@dataclass
class ScoreTriple:
    frame_index: int
    timestamp_ms: int
    spatial: np.ndarray
    temporal: np.ndarray
    fused: np.ndarray

    @property
    def label(self) -> int:
        return int(self.fused.argmax())

    @property
    def confidence(self) -> float:
        return float(self.fused.max())

    def flat(self) -> np.ndarray:
        return np.concatenate([self.spatial, self.temporal, self.fused])


class PipelineScorer:
    """Stateful scorer; feed processed frames in stream order."""

    def __init__(
        self,
        spatial: StreamModel,
        temporal: StreamModel,
        svm: SvmModel,
        augment_cfg: AugmentConfig | None = None,
        flow_params: Tvl1Params = FLOW_PARAMS,
        flow_scale: float = FLOW_SCALE,
        stack_len: int = DEFAULT_STACK_LEN,
    ):
        self.spatial = spatial
        self.temporal = temporal
        self.svm = svm
        self.augment_cfg = augment_cfg or AugmentConfig()
        self.flow_params = flow_params
        self.flow_scale = flow_scale
        self.stack_len = stack_len
        self._prev_gray: np.ndarray | None = None
        self._stack: deque[np.ndarray] = deque(maxlen=stack_len)

    def reset(self) -> None:
        self._prev_gray = None
        self._stack.clear()

    def score(self, frame: Frame) -> ScoreTriple:
        gray = flow_gray(frame, self.flow_scale)
        if self._prev_gray is None:
            pair = np.zeros((2, *gray.shape), dtype=np.float32)
        else:
            flow = tvl1_flow_gray(self._prev_gray, gray, self.flow_params)
            pair = np.stack([flow.u, flow.v]).astype(np.float32)
        self._prev_gray = gray
        if not self._stack:
            for _ in range(self.stack_len):
                self._stack.append(np.zeros_like(pair))
        self._stack.append(pair)

        spatial_scores = forward(self.spatial, eval_transform(frame, self.augment_cfg))
        planes = np.stack(list(self._stack))
        temporal_scores = forward(self.temporal, temporal_input(planes))
        fused = svm_scores(
            self.svm, np.concatenate([spatial_scores, temporal_scores])[None]
        )[0]
        return ScoreTriple(
            frame_index=frame.index,
            timestamp_ms=frame.timestamp_ms,
            spatial=spatial_scores,
            temporal=temporal_scores,
            fused=fused,
        )


def batch_scores(scorer: PipelineScorer, frames) -> list[ScoreTriple]:
    """Offline evaluation: a fresh pass over already skip-scheduled frames."""
    scorer.reset()
    return [scorer.score(f) for f in frames]
