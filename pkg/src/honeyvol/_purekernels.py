"""Pure numpy versions of the compiled kernels (used when the extension is missing)."""

import numpy as np


def inside(A, b, Y):
    """``all(A @ y <= b)`` for every row ``y`` of ``Y``."""
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if A.shape[0] == 0:
        return np.ones(len(Y), dtype=bool)
    return np.all(Y @ A.T <= np.asarray(b, dtype=float)[None, :] + 1e-12, axis=1)


def inside_paired(A, B, Y):
    """Membership of ``Y[i]`` in ``{A y <= B[:, i]}``."""
    A = np.asarray(A, dtype=float)
    Y = np.asarray(Y, dtype=float)
    if A.shape[0] == 0:
        return np.ones(len(Y), dtype=bool)
    return np.all(A @ Y.T <= np.asarray(B, dtype=float) + 1e-12, axis=0)


def interval_lengths(a, B):
    """Lengths of ``{t : a_r t <= B[r, i]}`` per column ``i`` (rows with
    ``a_r = 0`` must hold outright)."""
    a = np.asarray(a, dtype=float)
    B = np.asarray(B, dtype=float)
    pos, neg, zero = a > 0, a < 0, a == 0
    hi = np.min(B[pos] / a[pos, None], axis=0) if pos.any() else np.full(B.shape[1], np.inf)
    lo = np.max(B[neg] / a[neg, None], axis=0) if neg.any() else np.full(B.shape[1], -np.inf)
    out = np.maximum(hi - lo, 0.0)
    if zero.any():
        out[np.any(B[zero] < -1e-12, axis=0)] = 0.0
    return out


def count_inside(A, b, Y):
    return int(np.count_nonzero(inside(A, b, Y)))
