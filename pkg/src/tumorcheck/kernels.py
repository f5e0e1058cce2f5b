"""Backend selection for the grid kernels.

The compiled ``_ckernels`` extension is used when it imports; otherwise the
pure-Python ``_pykernels`` module is. Setting ``TUMORCHECK_PURE_PYTHON=1``
forces the fallback.
"""
import os

import numpy as np

from . import _pykernels

try:
    from . import _ckernels
except ImportError:  # extension not built
    _ckernels = None

BACKENDS = {"python": _pykernels}
if _ckernels is not None:
    BACKENDS["cython"] = _ckernels

if _ckernels is not None and os.environ.get("TUMORCHECK_PURE_PYTHON", "") in ("", "0"):
    BACKEND = "cython"
else:
    BACKEND = "python"

_impl = BACKENDS[BACKEND]


def use_backend(name):
    """Switch the active backend at runtime ("cython" or "python")."""
    global _impl, BACKEND
    if name not in BACKENDS:
        raise ValueError(f"backend {name!r} unavailable; have {sorted(BACKENDS)}")
    _impl = BACKENDS[name]
    BACKEND = name


def _u8(mask):
    return np.ascontiguousarray(mask, dtype=np.uint8)


def bfs_distance(seeds, conn8=False):
    return np.asarray(_impl.bfs_distance(_u8(seeds), bool(conn8)), dtype=np.int32)


def flood_fill(allowed, seeds, conn8=False):
    return np.asarray(_impl.flood_fill(_u8(allowed), _u8(seeds), bool(conn8)), dtype=bool)


def eg_fixpoint(phi, conn8=False):
    return np.asarray(_impl.eg_fixpoint(_u8(phi), bool(conn8)), dtype=bool)
