"""Binary frame-streaming protocol used for cloud-side inference.

Little-endian over a persistent byte stream:

    header:   magic "LENS" | version u8=1 | camera_id_len u8 | camera_id
    frame:    frame_index u32 | timestamp_ms u64 | width u16 | height u16 |
              pixfmt u8 (0 = RGB24) | payload
    response: frame_index u32 | 12 f32 (spatial 4, temporal 4, fused 4)

On a protocol violation the server sends a diagnostic frame
("LERR" | msg_len u16 | utf-8 message) and closes the connection.
"""
from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from lens.videoio.clips import Frame

MAGIC = b"LENS"
ERROR_MAGIC = b"LERR"
VERSION = 1
PIXFMT_RGB24 = 0

_FRAME_HEADER = struct.Struct("<IQHHB")
_RESPONSE = struct.Struct("<I12f")
_ERROR_HEADER = struct.Struct("<4sH")


class ProtocolError(ConnectionError):
    pass


def encode_header(camera_id: str) -> bytes:
    encoded = camera_id.encode()
    if len(encoded) > 255:
        raise ValueError("camera id too long")
    return MAGIC + bytes([VERSION, len(encoded)]) + encoded


def encode_frame(frame: Frame) -> bytes:
    return (
        _FRAME_HEADER.pack(
            frame.index, frame.timestamp_ms, frame.width, frame.height, PIXFMT_RGB24
        )
        + frame.pixels.tobytes()
    )


def encode_response(frame_index: int, scores: np.ndarray) -> bytes:
    return _RESPONSE.pack(frame_index, *np.asarray(scores, dtype=np.float64).ravel())


def encode_error(message: str) -> bytes:
    data = message.encode()[:65535]
    return _ERROR_HEADER.pack(ERROR_MAGIC, len(data)) + data


class StreamReader:
    """Blocking reader over a socket-like object with recv()."""

    def __init__(self, sock):
        self._sock = sock
        self._buf = b""

    def read_exact(self, n: int) -> bytes:
        while len(self._buf) < n:
            chunk = self._sock.recv(65536)
            if not chunk:
                raise ConnectionError("stream closed mid-message")
            self._buf += chunk
        out, self._buf = self._buf[:n], self._buf[n:]
        return out

    def read_exact_or_eof(self, n: int) -> bytes | None:
        """Like read_exact, but a connection closed cleanly between
        messages returns None instead of raising."""
        if not self._buf:
            chunk = self._sock.recv(65536)
            if not chunk:
                return None
            self._buf += chunk
        return self.read_exact(n)


def read_header(reader: StreamReader) -> str:
    magic = reader.read_exact(4)
    if magic != MAGIC:
        raise ProtocolError(f"bad stream magic {magic!r}")
    version, id_len = reader.read_exact(2)
    if version != VERSION:
        raise ProtocolError(f"unsupported protocol version {version}")
    return reader.read_exact(id_len).decode()


def _decode_frame(reader: StreamReader, head: bytes) -> Frame:
    index, timestamp_ms, width, height, pixfmt = _FRAME_HEADER.unpack(head)
    if pixfmt != PIXFMT_RGB24:
        raise ProtocolError(f"unsupported pixel format {pixfmt}")
    if width == 0 or height == 0 or width > 4096 or height > 4096:
        raise ProtocolError(f"implausible frame size {width}x{height}")
    payload = reader.read_exact(width * height * 3)
    pixels = np.frombuffer(payload, dtype=np.uint8).reshape(height, width, 3).copy()
    return Frame(width, height, pixels, index, timestamp_ms)


def read_frame(reader: StreamReader) -> Frame:
    return _decode_frame(reader, reader.read_exact(_FRAME_HEADER.size))


def read_frame_or_eof(reader: StreamReader) -> Frame | None:
    """One frame message, or None if the peer closed between messages."""
    head = reader.read_exact_or_eof(_FRAME_HEADER.size)
    if head is None:
        return None
    return _decode_frame(reader, head)


def read_response(reader: StreamReader) -> tuple[int, np.ndarray] | None:
    """Returns (frame_index, 12 scores), or None on clean end of stream;
    raises ProtocolError on a server diagnostic frame."""
    first = reader.read_exact_or_eof(4)
    if first is None:
        return None
    if first == ERROR_MAGIC:
        (msg_len,) = struct.unpack("<H", reader.read_exact(2))
        raise ProtocolError(reader.read_exact(msg_len).decode())
    rest = reader.read_exact(_RESPONSE.size - 4)
    index, *scores = _RESPONSE.unpack(first + rest)
    return index, np.array(scores, dtype=np.float64)
