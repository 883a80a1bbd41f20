"""Clip data model, synthetic dataset generation, ring buffering, frame skipping."""
from .clips import (
    ActionLabel,
    Clip,
    ClipFormatError,
    Frame,
    clip_from_array,
    clip_from_bytes,
    clip_to_bytes,
    frame_timestamp_ms,
    load_clip,
    save_clip,
)
from .ring import RingBuffer
from .synth import (
    dataset_manifest,
    generate_synthetic_dataset,
    iter_dataset_paths,
    load_dataset,
    render_clip,
)
from .throughput import (
    SkipPolicy,
    ThroughputReport,
    measure_throughput,
    repeat_frames,
    skip_iter,
    skip_stream,
)

__all__ = [
    "ActionLabel",
    "Clip",
    "ClipFormatError",
    "Frame",
    "RingBuffer",
    "SkipPolicy",
    "ThroughputReport",
    "clip_from_array",
    "clip_from_bytes",
    "clip_to_bytes",
    "dataset_manifest",
    "frame_timestamp_ms",
    "generate_synthetic_dataset",
    "iter_dataset_paths",
    "load_clip",
    "load_dataset",
    "measure_throughput",
    "render_clip",
    "repeat_frames",
    "save_clip",
    "skip_iter",
    "skip_stream",
]
