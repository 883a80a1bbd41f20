"""The live edge pipeline: bounded-queue worker stages over a frame source.

Stages: ingest (ring buffer + skip policy) -> scoring (local models or the
cloud inference stream) -> detection (debounce + cooldown) -> transmission.
File sources use blocking queues so results match offline evaluation
exactly; live sources may drop oldest on overflow.
"""
from __future__ import annotations

import logging
import queue
import threading
import time
from dataclasses import dataclass, field
from typing import Callable, Iterable

import numpy as np

from lens.videoio.clips import Frame
from lens.videoio.ring import RingBuffer

from .client import FrameStreamClient
from .config import EdgeConfig, InferenceMode
from .detect import DetectionState, detect
from .events import EVENT_CLIP_SECONDS, CrimeEvent, assemble_event
from .scorer import PipelineScorer, ScoreTriple
from .transmit import Transmitter

log = logging.getLogger(__name__)

_SENTINEL = None


@dataclass
class PipelineResult:
    scores: list[ScoreTriple] = field(default_factory=list)
    events: list[CrimeEvent] = field(default_factory=list)
    acks: list[dict] = field(default_factory=list)
    frames_ingested: int = 0
    frames_processed: int = 0


def _ring_capacity(config: EdgeConfig, fps: int) -> int:
    # ingest can run ahead of detection by the queue depths; keep the full
    # event clip window reachable at detection time
    lag_frames = (2 * config.queue_capacity + 4) * config.skip.stride
    return max(int(EVENT_CLIP_SECONDS * fps) + lag_frames, 5 * fps)


def run_pipeline(
    source: Iterable[Frame],
    config: EdgeConfig,
    scorer: PipelineScorer | None = None,
    transmitter: Transmitter | None = None,
    fps: int = 30,
    epoch_offset_ms: int | None = None,
    frame_transform: Callable[[Frame], Frame] | None = None,
) -> PipelineResult:
    """Run the full pipeline over a frame source until exhaustion.

    In edge mode ``scorer`` must be provided; in cloud mode frames go to the
    relay's inference port and scores come back over the same connection.
    Detection timestamps use the frame clock, so file runs are repeatable.
    """
    if config.mode == InferenceMode.EDGE and scorer is None:
        raise ValueError("edge inference requires loaded models")
    if epoch_offset_ms is None:
        epoch_offset_ms = int(time.time() * 1000)

    ring = RingBuffer(capacity_frames=_ring_capacity(config, fps), fps=fps)
    q_score: queue.Queue = queue.Queue(maxsize=config.queue_capacity)
    q_detect: queue.Queue = queue.Queue(maxsize=config.queue_capacity)
    q_transmit: queue.Queue = queue.Queue()
    result = PipelineResult()
    errors: list[BaseException] = []
    warmup = (scorer.stack_len + 1) if scorer is not None else 11
    state = DetectionState(window_size=config.debounce_window,
                           cooldown_ms=config.cooldown_ms,
                           warmup_frames=warmup)

    def guard(fn):
        def wrapped():
            try:
                fn()
            except BaseException as exc:  # propagated after join
                errors.append(exc)

        return wrapped

    def ingest():
        stride = config.skip.stride
        pos = 0
        try:
            for frame in source:
                if frame_transform is not None:
                    frame = frame_transform(frame)
                ring.push(frame)
                result.frames_ingested += 1
                if pos % stride == 0:
                    q_score.put(frame)
                pos += 1
        finally:
            q_score.put(_SENTINEL)

    def score_local():
        try:
            while (frame := q_score.get()) is not _SENTINEL:
                q_detect.put(scorer.score(frame))
        finally:
            q_detect.put(_SENTINEL)

    def score_cloud():
        client = FrameStreamClient(
            config.infer_host, config.infer_port, config.camera_id,
            queue_capacity=config.queue_capacity, block_on_full=True,
        )
        pending: dict[int, int] = {}
        lock = threading.Lock()

        def reader():
            try:
                while (response := client.read_score()) is not None:
                    index, scores = response
                    with lock:
                        ts = pending.pop(index, 0)
                    q_detect.put(
                        ScoreTriple(
                            frame_index=index,
                            timestamp_ms=ts,
                            spatial=scores[0:4],
                            temporal=scores[4:8],
                            fused=scores[8:12],
                        )
                    )
            finally:
                q_detect.put(_SENTINEL)

        reader_thread = threading.Thread(target=reader, daemon=True)
        reader_thread.start()
        try:
            while (frame := q_score.get()) is not _SENTINEL:
                with lock:
                    pending[frame.index] = frame.timestamp_ms
                client.submit(frame)
        finally:
            client.finish()
            reader_thread.join()
            client.close()

    def detector():
        try:
            while (scores := q_detect.get()) is not _SENTINEL:
                result.scores.append(scores)
                result.frames_processed += 1
                fired = detect(state, scores, config.threshold, scores.timestamp_ms)
                if fired is not None:
                    event, clip = assemble_event(
                        fired, ring, config.camera_id, config.lat, config.lon,
                        epoch_offset_ms=epoch_offset_ms,
                    )
                    result.events.append(event)
                    q_transmit.put((event, clip))
        finally:
            q_transmit.put(_SENTINEL)

    def transmit_worker():
        while (item := q_transmit.get()) is not _SENTINEL:
            event, clip = item
            if transmitter is None:
                continue
            ack = transmitter.send(event, clip)
            if ack is not None:
                result.acks.append(ack)

    stages = [
        threading.Thread(target=guard(ingest), name="lens-ingest"),
        threading.Thread(
            target=guard(score_local if config.mode == InferenceMode.EDGE else score_cloud),
            name="lens-score",
        ),
        threading.Thread(target=guard(detector), name="lens-detect"),
        threading.Thread(target=guard(transmit_worker), name="lens-transmit"),
    ]
    for stage in stages:
        stage.start()
    for stage in stages:
        stage.join()
    if errors:
        raise errors[0]
    return result


def offline_scores(
    clip_frames: Iterable[Frame], config: EdgeConfig, scorer: PipelineScorer
) -> list[ScoreTriple]:
    """Batch-mode oracle: the same per-frame math without any threading."""
    stride = config.skip.stride
    scorer.reset()
    return [
        scorer.score(frame)
        for pos, frame in enumerate(clip_frames)
        if pos % stride == 0
    ]


def downscale_frame(frame: Frame, factor: float = 0.5) -> Frame:
    """Resolution reduction for the bench's 'reduced' rows."""
    from lens.streams.augment import _resize_plane

    nh = max(int(round(frame.height * factor)), 8)
    nw = max(int(round(frame.width * factor)), 8)
    planes = [
        _resize_plane(frame.pixels[:, :, c].astype(np.float64), nh, nw)
        for c in range(3)
    ]
    pixels = np.clip(np.rint(np.stack(planes, axis=-1)), 0, 255).astype(np.uint8)
    return Frame(nw, nh, pixels, frame.index, frame.timestamp_ms)
