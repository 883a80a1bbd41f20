"""Two-stream classifiers: reference model, training mechanics, augmentation."""
from .augment import DESK_AUGMENT, IDENTITY_AUGMENT, AugmentConfig, augment, eval_transform
from .checkpoint import ModelFormatError, load_model, load_sidecar, save_model
from .crossmod import cross_modality_init
from .data import (
    DEFAULT_STACK_LEN,
    FLOW_PARAMS,
    FLOW_SCALE,
    SpatialVideo,
    TemporalVideo,
    cached_flow_planes,
    clip_flow_planes,
    flow_gray,
    temporal_input,
)
from .gradcheck import gradient_check
from .model import (
    N_CLASSES,
    StreamKind,
    StreamModel,
    forward,
    forward_batch,
    new_model,
    softmax,
    zero_model,
)
from .sampling import (
    center_segment_frames,
    sample_segment_frames,
    segment_windows,
    segmental_consensus,
)
from .train import (
    DESK_SPATIAL_CONFIG,
    DESK_TEMPORAL_CONFIG,
    SPATIAL_CONFIG,
    TEMPORAL_CONFIG,
    EpochMetrics,
    PlateauScheduler,
    TrainConfig,
    TrainingDiverged,
    TrainResult,
    evaluate,
    predict_video,
    sgd_momentum_step,
    train_stream,
)

__all__ = [
    "AugmentConfig",
    "DEFAULT_STACK_LEN",
    "DESK_AUGMENT",
    "DESK_SPATIAL_CONFIG",
    "DESK_TEMPORAL_CONFIG",
    "EpochMetrics",
    "FLOW_PARAMS",
    "FLOW_SCALE",
    "IDENTITY_AUGMENT",
    "ModelFormatError",
    "N_CLASSES",
    "PlateauScheduler",
    "SPATIAL_CONFIG",
    "SpatialVideo",
    "StreamKind",
    "StreamModel",
    "TEMPORAL_CONFIG",
    "TemporalVideo",
    "TrainConfig",
    "TrainResult",
    "TrainingDiverged",
    "augment",
    "cached_flow_planes",
    "center_segment_frames",
    "clip_flow_planes",
    "cross_modality_init",
    "eval_transform",
    "evaluate",
    "flow_gray",
    "forward",
    "forward_batch",
    "gradient_check",
    "load_model",
    "load_sidecar",
    "new_model",
    "predict_video",
    "sample_segment_frames",
    "save_model",
    "segment_windows",
    "segmental_consensus",
    "sgd_momentum_step",
    "softmax",
    "train_stream",
    "zero_model",
]
