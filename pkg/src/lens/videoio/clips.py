"""Clip and frame data model plus the raw `.lclip` container format."""
from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import IntEnum
from pathlib import Path

import numpy as np

LCLIP_MAGIC = b"LCLP"
LCLIP_VERSION = 1

# magic(4) version(2) width(2) height(2) fps(2) frame_count(4)
# label(1) group(1) clip(2) reserved(4)  -> 24-byte header
_HEADER = struct.Struct("<4sHHHHIBBH4x")
_FRAME_HEADER = struct.Struct("<II")

UNLABELED = 255


class ActionLabel(IntEnum):
    THEFT = 0
    ASSAULT = 1
    SHOOTING = 2
    NO_ACTION = 3

    @classmethod
    def from_name(cls, name: str) -> "ActionLabel":
        key = name.strip().lower().replace("-", "_").replace(" ", "_")
        for member in cls:
            if member.name.lower() == key:
                return member
        raise ValueError(f"unknown action label: {name!r}")

    @property
    def wire_name(self) -> str:
        return self.name.lower()


class ClipFormatError(ValueError):
    """Raised on malformed `.lclip` data; carries the failing byte offset."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


@dataclass
class Frame:
    """One RGB frame. ``pixels`` is a (height, width, 3) uint8 array."""

    width: int
    height: int
    pixels: np.ndarray
    index: int
    timestamp_ms: int

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("frame dimensions must be positive")
        if self.pixels.shape != (self.height, self.width, 3):
            raise ValueError(
                f"pixel array shape {self.pixels.shape} does not match "
                f"{self.height}x{self.width}x3"
            )
        if self.pixels.dtype != np.uint8:
            raise ValueError("pixels must be uint8")


def frame_timestamp_ms(index: int, fps: int) -> int:
    return index * 1000 // fps


@dataclass
class Clip:
    frames: list[Frame] = field(default_factory=list)
    fps: int = 30
    label: ActionLabel | None = None
    group_id: int = 0
    clip_id: int = 0

    def __post_init__(self):
        if self.frames:
            w, h = self.frames[0].width, self.frames[0].height
            for f in self.frames:
                if (f.width, f.height) != (w, h):
                    raise ValueError("all frames in a clip must share dimensions")

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def width(self) -> int:
        return self.frames[0].width

    @property
    def height(self) -> int:
        return self.frames[0].height

    @property
    def duration_s(self) -> float:
        return len(self.frames) / self.fps

    def as_array(self) -> np.ndarray:
        """Stacked (n, height, width, 3) uint8 view of the frames."""
        return np.stack([f.pixels for f in self.frames])


def clip_from_array(
    video: np.ndarray,
    fps: int = 30,
    label: ActionLabel | None = None,
    group_id: int = 0,
    clip_id: int = 0,
) -> Clip:
    """Build a Clip from an (n, h, w, 3) uint8 array, deriving timestamps."""
    n, h, w, _ = video.shape
    frames = [
        Frame(w, h, np.ascontiguousarray(video[i]), i, frame_timestamp_ms(i, fps))
        for i in range(n)
    ]
    return Clip(frames=frames, fps=fps, label=label, group_id=group_id, clip_id=clip_id)


def save_clip(clip: Clip, path: str | Path) -> None:
    path = Path(path)
    label_byte = UNLABELED if clip.label is None else int(clip.label)
    header = _HEADER.pack(
        LCLIP_MAGIC,
        LCLIP_VERSION,
        clip.width,
        clip.height,
        clip.fps,
        len(clip.frames),
        label_byte,
        clip.group_id,
        clip.clip_id,
    )
    with open(path, "wb") as fh:
        fh.write(header)
        for frame in clip.frames:
            fh.write(_FRAME_HEADER.pack(frame.index, frame.timestamp_ms))
            fh.write(frame.pixels.tobytes())


def clip_to_bytes(clip: Clip) -> bytes:
    """Serialize exactly as :func:`save_clip` writes to disk."""
    parts = [
        _HEADER.pack(
            LCLIP_MAGIC,
            LCLIP_VERSION,
            clip.width,
            clip.height,
            clip.fps,
            len(clip.frames),
            UNLABELED if clip.label is None else int(clip.label),
            clip.group_id,
            clip.clip_id,
        )
    ]
    for frame in clip.frames:
        parts.append(_FRAME_HEADER.pack(frame.index, frame.timestamp_ms))
        parts.append(frame.pixels.tobytes())
    return b"".join(parts)


def clip_from_bytes(data: bytes) -> Clip:
    if len(data) < _HEADER.size:
        raise ClipFormatError("truncated header", len(data))
    magic, version, width, height, fps, count, label_byte, group, clip_id = (
        _HEADER.unpack_from(data, 0)
    )
    if magic != LCLIP_MAGIC:
        raise ClipFormatError(f"bad magic {magic!r}", 0)
    if version != LCLIP_VERSION:
        raise ClipFormatError(f"unsupported version {version}", 4)
    if width == 0 or height == 0:
        raise ClipFormatError("zero frame dimensions", 6)
    payload_len = width * height * 3
    offset = _HEADER.size
    frames = []
    for i in range(count):
        if offset + _FRAME_HEADER.size > len(data):
            raise ClipFormatError(f"truncated frame header for frame {i}", offset)
        index, timestamp_ms = _FRAME_HEADER.unpack_from(data, offset)
        offset += _FRAME_HEADER.size
        if offset + payload_len > len(data):
            raise ClipFormatError(f"truncated pixel payload for frame {i}", offset)
        pixels = (
            np.frombuffer(data, dtype=np.uint8, count=payload_len, offset=offset)
            .reshape(height, width, 3)
            .copy()
        )
        offset += payload_len
        frames.append(Frame(width, height, pixels, index, timestamp_ms))
    label = None if label_byte == UNLABELED else ActionLabel(label_byte)
    return Clip(frames=frames, fps=fps, label=label, group_id=group, clip_id=clip_id)


def load_clip(path: str | Path) -> Clip:
    with open(path, "rb") as fh:
        return clip_from_bytes(fh.read())
