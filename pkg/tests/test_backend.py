import numpy as np
import pytest

from honeyvol import _backend, _purekernels

try:
    from honeyvol import _kernels
except ImportError:  # pragma: no cover
    _kernels = None


def data(seed=0, m=2000, k=4, rows=9):
    rng = np.random.default_rng(seed)
    A = rng.standard_normal((rows, k))
    b = rng.random(rows)
    Y = rng.standard_normal((m, k)) * 0.5
    B = b[:, None] + 0.1 * rng.standard_normal((rows, m))
    a = rng.standard_normal(rows)
    a[2] = 0.0
    return A, b, Y, B, a


def test_backend_name():
    assert _backend.BACKEND in ("cython", "python")


@pytest.mark.skipif(_kernels is None, reason="compiled extension not built")
@pytest.mark.parametrize("seed", range(3))
def test_compiled_matches_pure(seed):
    A, b, Y, B, a = data(seed)
    assert np.array_equal(_kernels.inside(A, b, Y), _purekernels.inside(A, b, Y))
    assert np.array_equal(_kernels.inside_paired(A, B, Y), _purekernels.inside_paired(A, B, Y))
    assert np.allclose(_kernels.interval_lengths(a, B), _purekernels.interval_lengths(a, B))


def test_dispatch_accepts_lists():
    A, b, Y, B, a = data(5, m=50)
    assert np.array_equal(_backend.inside(A.tolist(), b.tolist(), Y), _purekernels.inside(A, b, Y))
    assert np.allclose(_backend.interval_lengths(a, B), _purekernels.interval_lengths(a, B))


def test_empty_constraint_set():
    Y = np.zeros((3, 2))
    assert _purekernels.inside(np.zeros((0, 2)), np.zeros(0), Y).all()
