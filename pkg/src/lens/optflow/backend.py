"""Selects the flow kernel implementation at import time.

The compiled extension is preferred; the numpy implementation is the
fallback. ``LENS_PURE_PYTHON=1`` forces the fallback (used by the backend
parity tests and the kernel benchmark).
"""
from __future__ import annotations

import os

from . import _tvl1_numpy

if os.environ.get("LENS_PURE_PYTHON") == "1":
    _impl = _tvl1_numpy
    COMPILED = False
else:
    try:
        from . import _tvl1_cy as _impl  # type: ignore[no-redef]

        COMPILED = True
    except ImportError:
        _impl = _tvl1_numpy
        COMPILED = False

BACKEND_NAME = "cython" if COMPILED else "numpy"

solve_level = _impl.solve_level
warp_bilinear = _impl.warp_bilinear
median3x3 = _impl.median3x3
central_gradient = _impl.central_gradient


def available_backends() -> dict[str, object]:
    """Name -> module for every importable kernel backend."""
    backends: dict[str, object] = {"numpy": _tvl1_numpy}
    try:
        from . import _tvl1_cy

        backends["cython"] = _tvl1_cy
    except ImportError:
        pass
    return backends
