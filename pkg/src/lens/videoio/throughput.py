"""Frame-skip scheduling and throughput measurement."""
from __future__ import annotations

import time
from dataclasses import dataclass
from typing import Callable, Iterable, Iterator

from .clips import Clip, Frame

MAX_SUPPORTED_SKIP = 4


@dataclass(frozen=True)
class SkipPolicy:
    """Drop ``skip`` frames between processed ones."""

    skip: int = 0

    def __post_init__(self):
        if not 0 <= self.skip <= MAX_SUPPORTED_SKIP:
            raise ValueError(f"skip must be in [0, {MAX_SUPPORTED_SKIP}]")

    @property
    def stride(self) -> int:
        return self.skip + 1


def skip_iter(clip: Clip, policy: SkipPolicy) -> Iterator[Frame]:
    """Yield frames at indices 0, stride, 2*stride, ... in order."""
    yield from clip.frames[:: policy.stride]


def skip_stream(frames: Iterable[Frame], policy: SkipPolicy) -> Iterator[Frame]:
    """Skip-schedule an arbitrary frame stream (position-based, not index-based)."""
    for pos, frame in enumerate(frames):
        if pos % policy.stride == 0:
            yield frame


@dataclass(frozen=True)
class ThroughputReport:
    frames_processed: int
    wall_ms: float
    processing_fps: float
    effective_fps: float
    skip: int

    def __post_init__(self):
        if min(self.frames_processed, self.wall_ms, self.processing_fps) < 0:
            raise ValueError("throughput figures must be non-negative")


def measure_throughput(
    frame_source: Iterable[Frame],
    per_frame_work: Callable[[Frame], object],
    policy: SkipPolicy,
    window_s: float,
    clock: Callable[[], float] = time.perf_counter,
) -> ThroughputReport:
    """Run ``per_frame_work`` on a skip-scheduled stream for ``window_s`` seconds.

    ``effective_fps`` counts skipped frames as covered: it equals
    ``processing_fps * (skip + 1)`` by construction.
    """
    if window_s < 1.0:
        raise ValueError("measurement window must be at least 1 s")
    processed = 0
    start = clock()
    deadline = start + window_s
    for pos, frame in enumerate(frame_source):
        if pos % policy.stride == 0:
            per_frame_work(frame)
            processed += 1
        if clock() >= deadline:
            break
    wall_s = max(clock() - start, 1e-9)
    processing_fps = processed / wall_s
    return ThroughputReport(
        frames_processed=processed,
        wall_ms=wall_s * 1000.0,
        processing_fps=processing_fps,
        effective_fps=processing_fps * policy.stride,
        skip=policy.skip,
    )


def repeat_frames(clip: Clip) -> Iterator[Frame]:
    """Endless frame source cycling over a clip (for benchmarking)."""
    while True:
        yield from clip.frames
