"""Self-describing binary model checkpoints (`LMDL`) with a JSON sidecar."""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .model import StreamKind, StreamModel

LMDL_MAGIC = b"LMDL"
_VERSION = 1
_KINDS = {StreamKind.SPATIAL: 0, StreamKind.TEMPORAL: 1}
_KINDS_REV = {v: k for k, v in _KINDS.items()}


class ModelFormatError(ValueError):
    pass


def save_model(model: StreamModel, path: str | Path, sidecar: dict | None = None) -> None:
    path = Path(path)
    arrays = model.params()
    with open(path, "wb") as fh:
        fh.write(LMDL_MAGIC)
        fh.write(struct.pack("<HBB", _VERSION, _KINDS[model.kind], len(arrays)))
        for name, arr in arrays.items():
            encoded = name.encode()
            fh.write(struct.pack("<B", len(encoded)))
            fh.write(encoded)
            fh.write(struct.pack("<B", arr.ndim))
            fh.write(struct.pack(f"<{arr.ndim}I", *arr.shape))
            fh.write(arr.astype("<f4").tobytes())
    meta = dict(sidecar or {})
    meta.setdefault("kind", model.kind.value)
    meta.setdefault("input_channels", model.input_channels)
    Path(str(path) + ".json").write_text(json.dumps(meta, sort_keys=True) + "\n")


def load_model(path: str | Path) -> StreamModel:
    data = Path(path).read_bytes()
    if data[:4] != LMDL_MAGIC:
        raise ModelFormatError(f"bad magic {data[:4]!r}")
    version, kind_byte, n_arrays = struct.unpack_from("<HBB", data, 4)
    if version != _VERSION:
        raise ModelFormatError(f"unsupported checkpoint version {version}")
    offset = 8
    arrays: dict[str, np.ndarray] = {}
    for _ in range(n_arrays):
        (name_len,) = struct.unpack_from("<B", data, offset)
        offset += 1
        name = data[offset : offset + name_len].decode()
        offset += name_len
        (ndim,) = struct.unpack_from("<B", data, offset)
        offset += 1
        shape = struct.unpack_from(f"<{ndim}I", data, offset)
        offset += 4 * ndim
        count = int(np.prod(shape))
        arr = np.frombuffer(data, dtype="<f4", count=count, offset=offset)
        offset += 4 * count
        arrays[name] = arr.reshape(shape).astype(np.float64)
    try:
        return StreamModel(
            kind=_KINDS_REV[kind_byte],
            input_channels=arrays["conv_w"].shape[1],
            **arrays,
        )
    except KeyError as exc:
        raise ModelFormatError(f"missing parameter array: {exc}") from exc


def load_sidecar(path: str | Path) -> dict:
    return json.loads(Path(str(path) + ".json").read_text())
