"""Edge agent: live pipeline, detection, event assembly, relay transmission."""
from .client import FrameStreamClient, stream_frames
from .config import EdgeConfig, InferenceMode, load_edge_config
from .detect import DEFAULT_COOLDOWN_MS, Detection, DetectionState, detect
from .events import EVENT_CLIP_SECONDS, CrimeEvent, assemble_event
from .pipeline import PipelineResult, downscale_frame, offline_scores, run_pipeline
from .scorer import PipelineScorer, ScoreTriple, batch_scores
from .transmit import PermanentRejection, Transmitter

__all__ = [
    "CrimeEvent",
    "DEFAULT_COOLDOWN_MS",
    "Detection",
    "DetectionState",
    "EVENT_CLIP_SECONDS",
    "EdgeConfig",
    "FrameStreamClient",
    "InferenceMode",
    "PermanentRejection",
    "PipelineResult",
    "PipelineScorer",
    "ScoreTriple",
    "Transmitter",
    "assemble_event",
    "batch_scores",
    "detect",
    "downscale_frame",
    "load_edge_config",
    "offline_scores",
    "run_pipeline",
    "stream_frames",
]
