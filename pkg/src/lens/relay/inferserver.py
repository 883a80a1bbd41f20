"""Cloud-side inference over the binary frame protocol.

One pipeline scorer per connected camera; responses carry the same
spatial/temporal/fused vectors the edge would compute locally, because
both sides run the identical scorer on the identical checkpoints.
"""
from __future__ import annotations

import logging
import socketserver
import threading

from lens import frameproto
from lens.edge.scorer import PipelineScorer
from lens.fusion.checkpoint import load_svm
from lens.streams.checkpoint import load_model

log = logging.getLogger(__name__)


class ModelBundle:
    def __init__(self, spatial_path, temporal_path, svm_path):
        self.spatial = load_model(spatial_path)
        self.temporal = load_model(temporal_path)
        self.svm = load_svm(svm_path)

    def make_scorer(self) -> PipelineScorer:
        return PipelineScorer(self.spatial, self.temporal, self.svm)


class _Handler(socketserver.BaseRequestHandler):
    def handle(self):
        reader = frameproto.StreamReader(self.request)
        try:
            camera_id = frameproto.read_header(reader)
        except (frameproto.ProtocolError, ConnectionError) as exc:
            log.warning("rejecting inference stream: %s", exc)
            self._diagnose(str(exc))
            return
        log.info("inference stream opened for camera %s", camera_id)
        scorer = self.server.bundle.make_scorer()
        served = 0
        while True:
            try:
                frame = frameproto.read_frame_or_eof(reader)
            except (frameproto.ProtocolError, ConnectionError) as exc:
                log.warning("camera %s: closing stream: %s", camera_id, exc)
                self._diagnose(str(exc))
                return
            if frame is None:
                break
            triple = scorer.score(frame)
            self.request.sendall(
                frameproto.encode_response(frame.index, triple.flat())
            )
            served += 1
        log.info("camera %s: stream ended after %d frames", camera_id, served)

    def _diagnose(self, message: str):
        try:
            self.request.sendall(frameproto.encode_error(message))
        except OSError:
            pass


class InferenceServer(socketserver.ThreadingTCPServer):
    allow_reuse_address = True
    daemon_threads = True

    def __init__(self, host: str, port: int, bundle: ModelBundle):
        super().__init__((host, port), _Handler)
        self.bundle = bundle

    @property
    def port(self) -> int:
        return self.server_address[1]


def start_inference_server(host: str, port: int, bundle: ModelBundle) -> InferenceServer:
    """Start serving in a daemon thread; returns the server (for shutdown)."""
    server = InferenceServer(host, port, bundle)
    thread = threading.Thread(target=server.serve_forever, daemon=True,
                              name="lens-infer-server")
    thread.start()
    return server
