"""Kernel selection: the compiled extension when importable, numpy otherwise.

Set ``HONEYVOL_PURE=1`` to force the numpy versions.
"""

import os

import numpy as np

from . import _purekernels

try:
    if os.environ.get("HONEYVOL_PURE"):
        raise ImportError("pure kernels requested")
    from . import _kernels as _compiled
except ImportError:  # pragma: no cover - depends on the build
    _compiled = None

BACKEND = "cython" if _compiled is not None else "python"


def _c(x):
    return np.ascontiguousarray(x, dtype=np.float64)


def inside(A, b, Y):
    if _compiled is None:
        return _purekernels.inside(A, b, Y)
    A = _c(A).reshape(len(A), -1)
    Y = _c(Y).reshape(len(Y), A.shape[1])
    return _compiled.inside(A, _c(b), Y)


def inside_paired(A, B, Y):
    if _compiled is None:
        return _purekernels.inside_paired(A, B, Y)
    A = _c(A).reshape(len(A), -1)
    Y = _c(Y).reshape(len(Y), A.shape[1])
    return _compiled.inside_paired(A, _c(B), Y)


def interval_lengths(a, B):
    if _compiled is None:
        return _purekernels.interval_lengths(a, B)
    return _compiled.interval_lengths(_c(a), _c(B))
