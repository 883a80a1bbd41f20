"""`LSVM` checkpoint: config, per-class support vectors and coefficients."""
from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .smo import BinarySvm, SvmConfig, SvmModel

LSVM_MAGIC = b"LSVM"
_VERSION = 1
_HEADER = struct.Struct("<4sHB")          # magic, version, n_classes
_CONFIG = struct.Struct("<BddddI")        # degree, gamma, coef0, C, tol, max_passes
_CLF = struct.Struct("<IIdB")             # n_sv, dim, bias, converged


class SvmFormatError(ValueError):
    pass


def save_svm(model: SvmModel, path: str | Path, sidecar: dict | None = None) -> None:
    cfg = model.config
    with open(path, "wb") as fh:
        fh.write(_HEADER.pack(LSVM_MAGIC, _VERSION, len(model.classifiers)))
        fh.write(
            _CONFIG.pack(cfg.degree, cfg.gamma, cfg.coef0, cfg.C, cfg.tol, cfg.max_passes)
        )
        for clf in model.classifiers:
            n_sv, dim = clf.support_vectors.shape if clf.support_vectors.size else (0, 8)
            fh.write(_CLF.pack(n_sv, dim, clf.bias, int(clf.converged)))
            fh.write(clf.support_vectors.astype("<f4").tobytes())
            fh.write(clf.dual_coef.astype("<f4").tobytes())
    if sidecar is not None:
        Path(str(path) + ".json").write_text(json.dumps(sidecar, sort_keys=True) + "\n")


def load_svm(path: str | Path) -> SvmModel:
    data = Path(path).read_bytes()
    if data[:4] != LSVM_MAGIC:
        raise SvmFormatError(f"bad magic {data[:4]!r}")
    _, version, n_classes = _HEADER.unpack_from(data, 0)
    if version != _VERSION:
        raise SvmFormatError(f"unsupported checkpoint version {version}")
    offset = _HEADER.size
    degree, gamma, coef0, c, tol, max_passes = _CONFIG.unpack_from(data, offset)
    offset += _CONFIG.size
    config = SvmConfig(
        degree=degree, gamma=gamma, coef0=coef0, C=c, tol=tol, max_passes=max_passes
    )
    classifiers = []
    for _ in range(n_classes):
        n_sv, dim, bias, converged = _CLF.unpack_from(data, offset)
        offset += _CLF.size
        sv = np.frombuffer(data, dtype="<f4", count=n_sv * dim, offset=offset)
        offset += 4 * n_sv * dim
        coef = np.frombuffer(data, dtype="<f4", count=n_sv, offset=offset)
        offset += 4 * n_sv
        classifiers.append(
            BinarySvm(
                support_vectors=sv.reshape(n_sv, dim).astype(np.float64),
                dual_coef=coef.astype(np.float64),
                bias=bias,
                converged=bool(converged),
                iterations=0,
            )
        )
    return SvmModel(config=config, classifiers=classifiers)
