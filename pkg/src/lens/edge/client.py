"""Frame-streaming client for cloud-side inference.

A sender thread pushes frames from a bounded queue while the caller reads
score responses. On a full queue the oldest unsent frame is dropped and a
counter incremented (live sources); file sources use blocking mode so no
frame is ever lost.
"""
from __future__ import annotations

import queue
import socket
import threading
from dataclasses import dataclass, field
from typing import Iterable, Iterator

import numpy as np

from lens import frameproto
from lens.videoio.clips import Frame


@dataclass
class StreamStats:
    sent: int = 0
    dropped: int = 0
    received: int = 0
    lock: threading.Lock = field(default_factory=threading.Lock, repr=False)


class FrameStreamClient:
    def __init__(self, host: str, port: int, camera_id: str,
                 queue_capacity: int = 8, block_on_full: bool = True):
        self._sock = socket.create_connection((host, port), timeout=30.0)
        self._sock.sendall(frameproto.encode_header(camera_id))
        self._reader = frameproto.StreamReader(self._sock)
        self._queue: queue.Queue = queue.Queue(maxsize=queue_capacity)
        self._block_on_full = block_on_full
        self.stats = StreamStats()
        self._sender = threading.Thread(target=self._send_loop, daemon=True)
        self._sender.start()

    def _send_loop(self):
        while True:
            frame = self._queue.get()
            if frame is None:
                try:
                    self._sock.shutdown(socket.SHUT_WR)
                except OSError:
                    pass
                return
            try:
                self._sock.sendall(frameproto.encode_frame(frame))
            except OSError:
                return
            with self.stats.lock:
                self.stats.sent += 1

    def submit(self, frame: Frame) -> None:
        if self._block_on_full:
            self._queue.put(frame)
            return
        try:
            self._queue.put_nowait(frame)
        except queue.Full:
            # drop-oldest: latest-wins semantics for live sources
            try:
                self._queue.get_nowait()
                with self.stats.lock:
                    self.stats.dropped += 1
            except queue.Empty:
                pass
            try:
                self._queue.put_nowait(frame)
            except queue.Full:
                with self.stats.lock:
                    self.stats.dropped += 1

    def finish(self) -> None:
        self._queue.put(None)

    def read_score(self) -> tuple[int, np.ndarray] | None:
        response = frameproto.read_response(self._reader)
        if response is None:
            return None
        with self.stats.lock:
            self.stats.received += 1
        return response

    def close(self) -> None:
        try:
            self._sock.close()
        except OSError:
            pass


def stream_frames(
    frames: Iterable[Frame],
    host: str,
    port: int,
    camera_id: str,
    queue_capacity: int = 8,
    block_on_full: bool = True,
) -> Iterator[tuple[int, np.ndarray]]:
    """Stream already skip-scheduled frames; yield (frame_index, 12 scores)
    in order. The 12 scores are spatial(4) | temporal(4) | fused(4).

    A feeder thread keeps frames flowing while scores are read, so the
    socket never deadlocks on its buffers.
    """
    client = FrameStreamClient(host, port, camera_id, queue_capacity, block_on_full)

    def feed():
        for frame in frames:
            client.submit(frame)
        client.finish()

    feeder = threading.Thread(target=feed, daemon=True)
    feeder.start()
    try:
        while True:
            response = client.read_score()
            if response is None:
                break
            yield response
        feeder.join()
    finally:
        client.close()
