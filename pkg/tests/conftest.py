"""Shared fixtures: the synthetic corpus, trained checkpoints, live servers.

The expensive chain (dataset -> flow cache -> stream training -> SVM) runs
once per session; everything downstream (pipeline, relay, acceptance)
shares it.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

CORPUS_SEED = 7
GROUPS_PER_ACTION = 8
CLIPS_PER_GROUP = 3
HELDOUT_SEED = CORPUS_SEED + 1000


@pytest.fixture(scope="session")
def corpus_dir(tmp_path_factory) -> Path:
    from lens.videoio import generate_synthetic_dataset

    out = tmp_path_factory.mktemp("corpus")
    return generate_synthetic_dataset(
        CORPUS_SEED,
        groups_per_action=GROUPS_PER_ACTION,
        clips_per_group=CLIPS_PER_GROUP,
        out_dir=out / "ds",
    )


def load_videos(dataset: Path):
    from lens.streams import SpatialVideo, TemporalVideo
    from lens.streams.augment import DESK_AUGMENT
    from lens.streams.data import cached_flow_planes
    from lens.videoio import iter_dataset_paths, load_clip

    spatial, temporal = [], []
    for path, label in iter_dataset_paths(dataset):
        clip = load_clip(path)
        spatial.append(SpatialVideo(clip=clip, label=int(label), cfg=DESK_AUGMENT))
        temporal.append(
            TemporalVideo(
                planes=cached_flow_planes(path, clip, dataset / "_flows"),
                label=int(label),
            )
        )
    return spatial, temporal


@pytest.fixture(scope="session")
def corpus_videos(corpus_dir):
    return load_videos(corpus_dir)


@pytest.fixture(scope="session")
def heldout_dir(tmp_path_factory) -> Path:
    from lens.videoio import generate_synthetic_dataset

    out = tmp_path_factory.mktemp("heldout")
    return generate_synthetic_dataset(
        HELDOUT_SEED,
        groups_per_action=4,
        clips_per_group=CLIPS_PER_GROUP,
        out_dir=out / "ds",
    )


@dataclass
class TrainedBundle:
    models_dir: Path
    spatial: object
    temporal: object
    svm: object
    spatial_history: list
    temporal_history: list
    svm_cv_mean: float


@pytest.fixture(scope="session")
def trained(corpus_videos, heldout_dir, tmp_path_factory) -> TrainedBundle:
    from lens.fusion import random_search, save_svm, svm_fit
    from lens.streams import (
        StreamKind,
        cross_modality_init,
        new_model,
        predict_video,
        save_model,
        train_stream,
    )
    from lens.streams.train import DESK_SPATIAL_CONFIG, DESK_TEMPORAL_CONFIG

    models_dir = tmp_path_factory.mktemp("models")
    spatial_videos, temporal_videos = corpus_videos

    spatial = new_model(StreamKind.SPATIAL, 3, seed=DESK_SPATIAL_CONFIG.seed)
    result_s = train_stream(spatial, spatial_videos, DESK_SPATIAL_CONFIG)

    channels = 2 * temporal_videos[0].stack_len
    temporal = new_model(
        StreamKind.TEMPORAL, channels, seed=DESK_TEMPORAL_CONFIG.seed, conv_bias=1.0
    )
    temporal.conv_w[:] = cross_modality_init(spatial.conv_w, channels)
    result_t = train_stream(temporal, temporal_videos, DESK_TEMPORAL_CONFIG)

    save_model(spatial, models_dir / "spatial.lmdl",
               {"history": result_s.history_dicts()})
    save_model(temporal, models_dir / "temporal.lmdl",
               {"history": result_t.history_dicts()})

    heldout_spatial, heldout_temporal = load_videos(heldout_dir)
    features = np.array(
        [
            np.concatenate([predict_video(spatial, sv), predict_video(temporal, tv)])
            for sv, tv in zip(heldout_spatial, heldout_temporal)
        ]
    )
    labels = np.array([v.label for v in heldout_spatial])
    config, cv, _ = random_search(features, labels, 12, seed=CORPUS_SEED)
    svm = svm_fit(features, labels, config)
    save_svm(svm, models_dir / "fusion.lsvm", {"cv_mean": cv.mean})

    return TrainedBundle(
        models_dir=models_dir,
        spatial=spatial,
        temporal=temporal,
        svm=svm,
        spatial_history=result_s.history_dicts(),
        temporal_history=result_t.history_dicts(),
        svm_cv_mean=cv.mean,
    )


class RelayHarness:
    """A live relay (uvicorn thread) plus optional inference server."""

    EDGE_TOKEN = "edge-secret"
    AUTHORITY_TOKEN = "authority-secret"
    CIVILIAN_TOKEN = "civilian-secret"

    def __init__(self, storage_dir: Path, models_dir: Path | None = None,
                 civilian_location: tuple[float, float] | None = (42.3398, -71.0892)):
        import uvicorn

        from lens.relay import (
            ModelBundle,
            RelayConfig,
            RelayState,
            TokenEntry,
            create_app,
            start_inference_server,
        )

        tokens = [
            TokenEntry(token=self.EDGE_TOKEN, role="edge", user_id="edge-1"),
            TokenEntry(token=self.AUTHORITY_TOKEN, role="authority", user_id="auth-1"),
            TokenEntry(
                token=self.CIVILIAN_TOKEN,
                role="civilian",
                user_id="civ-1",
                lat=civilian_location[0] if civilian_location else None,
                lon=civilian_location[1] if civilian_location else None,
            ),
        ]
        self.config = RelayConfig(storage=str(storage_dir), tokens=tokens, port=0)
        self.state = RelayState(self.config)
        app = create_app(self.state)
        self._uv_config = uvicorn.Config(
            app, host="127.0.0.1", port=0, log_level="error"
        )
        self._server = uvicorn.Server(self._uv_config)
        self._thread = threading.Thread(target=self._server.run, daemon=True)
        self._thread.start()
        while not self._server.started:
            import time

            time.sleep(0.01)
        self.port = self._server.servers[0].sockets[0].getsockname()[1]
        self.base_url = f"http://127.0.0.1:{self.port}"

        self.infer_server = None
        self.infer_port = None
        if models_dir is not None:
            bundle = ModelBundle(
                models_dir / "spatial.lmdl",
                models_dir / "temporal.lmdl",
                models_dir / "fusion.lsvm",
            )
            self.infer_server = start_inference_server("127.0.0.1", 0, bundle)
            self.infer_port = self.infer_server.port

    def headers(self, token: str) -> dict:
        return {"Authorization": f"Bearer {token}"}

    def stop(self):
        self._server.should_exit = True
        self._thread.join(timeout=5)
        if self.infer_server is not None:
            self.infer_server.shutdown()


@pytest.fixture
def make_relay(tmp_path, trained):
    harnesses = []

    def factory(with_models: bool = False, storage: Path | None = None,
                **kwargs) -> RelayHarness:
        harness = RelayHarness(
            storage or tmp_path / f"relay-{len(harnesses)}",
            models_dir=trained.models_dir if with_models else None,
            **kwargs,
        )
        harnesses.append(harness)
        return harness

    yield factory
    for harness in harnesses:
        harness.stop()


@pytest.fixture
def make_relay_bare(tmp_path):
    """Relay factory that does not require trained models."""
    harnesses = []

    def factory(storage: Path | None = None, **kwargs) -> RelayHarness:
        harness = RelayHarness(
            storage or tmp_path / f"relay-{len(harnesses)}", models_dir=None, **kwargs
        )
        harnesses.append(harness)
        return harness

    yield factory
    for harness in harnesses:
        harness.stop()
