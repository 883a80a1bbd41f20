"""Crime event records and their assembly from a detection plus the ring."""
from __future__ import annotations

import uuid
from dataclasses import dataclass

from lens.videoio.clips import ActionLabel, Clip
from lens.videoio.ring import RingBuffer

from .detect import Detection

EVENT_CLIP_SECONDS = 4.0


@dataclass
class CrimeEvent:
    event_id: str
    camera_id: str
    lat: float
    lon: float
    timestamp_ms: int
    label: ActionLabel
    confidence: float
    spatial_scores: list[float]
    temporal_scores: list[float]
    fused_scores: list[float]
    clip_ref: str | None = None
    short_clip: bool = False

    def __post_init__(self):
        if self.label == ActionLabel.NO_ACTION:
            raise ValueError("events must carry a crime label")
        if not -90.0 <= self.lat <= 90.0 or not -180.0 <= self.lon <= 180.0:
            raise ValueError("GPS coordinates out of range")

    def to_json(self) -> dict:
        return {
            "event_id": self.event_id,
            "camera_id": self.camera_id,
            "gps": {"lat": self.lat, "lon": self.lon},
            "timestamp_ms": self.timestamp_ms,
            "label": self.label.wire_name,
            "confidence": self.confidence,
            "scores": {
                "spatial": self.spatial_scores,
                "temporal": self.temporal_scores,
                "fused": self.fused_scores,
            },
            "clip_ref": self.clip_ref,
            "short_clip": self.short_clip,
        }


def assemble_event(
    detection: Detection,
    ring: RingBuffer,
    camera_id: str,
    lat: float,
    lon: float,
    epoch_offset_ms: int = 0,
) -> tuple[CrimeEvent, Clip]:
    """Build the alert payload: a fresh UUID, all score vectors, and the
    clip window ending at the detection frame."""
    clip, short = ring.extract_clip(EVENT_CLIP_SECONDS, end_index=detection.frame_index)
    event = CrimeEvent(
        event_id=str(uuid.uuid4()),
        camera_id=camera_id,
        lat=lat,
        lon=lon,
        timestamp_ms=epoch_offset_ms + detection.timestamp_ms,
        label=detection.label,
        confidence=detection.confidence,
        spatial_scores=[float(x) for x in detection.scores.spatial],
        temporal_scores=[float(x) for x in detection.scores.temporal],
        fused_scores=[float(x) for x in detection.scores.fused],
        short_clip=short,
    )
    return event, clip
