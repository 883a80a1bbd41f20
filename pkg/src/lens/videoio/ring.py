"""Edge-side frame ring buffer used to cut incident clips after a detection."""
from __future__ import annotations

import threading
from collections import deque

from .clips import Clip, Frame

DEFAULT_CAPACITY_FRAMES = 150  # 5 s at 30 fps: max clip length plus margin


class RingBuffer:
    """Fixed-capacity frame store: single writer, snapshot readers."""

    def __init__(self, capacity_frames: int = DEFAULT_CAPACITY_FRAMES, fps: int = 30):
        if capacity_frames < 1:
            raise ValueError("capacity must be at least one frame")
        self.capacity_frames = capacity_frames
        self.fps = fps
        self._frames: deque[Frame] = deque(maxlen=capacity_frames)
        self._lock = threading.Lock()

    def __len__(self) -> int:
        with self._lock:
            return len(self._frames)

    def push(self, frame: Frame) -> None:
        with self._lock:
            self._frames.append(frame)

    def snapshot(self) -> list[Frame]:
        with self._lock:
            return list(self._frames)

    def extract_clip(
        self, duration_s: float, end_index: int | None = None
    ) -> tuple[Clip, bool]:
        """Return the most recent ``duration_s`` of frames, oldest first.

        With ``end_index`` set, only frames up to that frame number are
        considered (the buffer may already hold newer frames). Returns the
        clip and a ``short`` flag set when fewer frames were available than
        requested. The buffer itself is left untouched.
        """
        wanted = int(round(duration_s * self.fps))
        if wanted > self.capacity_frames:
            raise ValueError(
                f"requested {wanted} frames exceeds capacity {self.capacity_frames}"
            )
        frames = self.snapshot()
        if end_index is not None:
            frames = [f for f in frames if f.index <= end_index]
        selected = frames[-wanted:] if wanted else []
        return Clip(frames=selected, fps=self.fps), len(selected) < wanted
