import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.spatial import ConvexHull, HalfspaceIntersection

from honeyvol.acceptance import WORKED_BOUNDARY
from honeyvol.classes import parse_angles
from honeyvol.errors import DimensionTooLarge
from honeyvol.honeycombs import structure_graphs
from honeyvol.volumes import (Polytope, VolumeEstimate, combine, interior_point, volume_exact, volume_mc,
                              volume_summand)


def box_rows(k):
    rows, rhs = [], []
    for i in range(k):
        e = [0] * k
        e[i] = 1
        rows.append(tuple(e))
        rhs.append(1)
        rows.append(tuple(-x for x in e))
        rhs.append(0)
    return rows, rhs


@pytest.mark.parametrize("k", [1, 2, 3, 4, 5])
def test_simplex_volume(k):
    rows = [tuple(-1 if j == i else 0 for j in range(k)) for i in range(k)] + [tuple([1] * k)]
    P = Polytope(tuple(rows), tuple([0] * k + [1]))
    assert volume_exact(P) == F(1, math.factorial(k))


def test_dimension_limit():
    rows, rhs = box_rows(7)
    with pytest.raises(DimensionTooLarge):
        volume_exact(Polytope(tuple(rows), tuple(rhs)))


@st.composite
def cut_boxes(draw):
    k = draw(st.integers(2, 3))
    rows, rhs = box_rows(k)
    for _ in range(draw(st.integers(1, 3))):
        a = tuple(draw(st.integers(-3, 3)) for _ in range(k))
        if not any(a):
            continue
        rows.append(a)
        rhs.append(F(draw(st.integers(1, 12)), 4))
    return Polytope(tuple(rows), tuple(rhs))


def hull_volume(P):
    point, radius = interior_point(P)
    if point is None or radius < 1e-9:
        return 0.0
    A = np.array(P.A, dtype=float)
    b = np.array([float(x) for x in P.b])
    hs = HalfspaceIntersection(np.hstack([A, -b[:, None]]), np.array(point, dtype=float))
    return ConvexHull(hs.intersections).volume


@settings(max_examples=60, deadline=None)
@given(cut_boxes())
def test_exact_volume_matches_convex_hull(P):
    v = volume_exact(P)
    assert isinstance(v, F)
    assert float(v) == pytest.approx(hull_volume(P), abs=1e-9)


def test_mc_agrees_and_is_reproducible():
    rows, rhs = box_rows(3)
    P = Polytope(tuple(rows + [(1, 1, 1)]), tuple(rhs + [F(3, 2)]))
    exact = float(volume_exact(P))
    e1 = volume_mc(P.contains_batch, 3, 200_000, seed=5)
    e2 = volume_mc(P.contains_batch, 3, 200_000, seed=5, jobs=4)
    assert e1 == e2
    assert abs(e1.value - exact) < 4 * e1.stderr
    assert exact == pytest.approx(0.5)


def test_combine_adds_in_quadrature():
    c = combine([VolumeEstimate(0.5, 0.03, "mc"), VolumeEstimate(F(1, 4), 0.0)])
    assert c.value == pytest.approx(0.75) and c.stderr == pytest.approx(0.03)
    assert combine([VolumeEstimate(F(1, 3)), VolumeEstimate(F(1, 6))]).value == F(1, 2)


def test_worked_instance_cell_volumes():
    a, b, g = (parse_angles(x) for x in WORKED_BOUNDARY)
    vols = [volume_summand(G, a, b, g, method="exact").value for G in structure_graphs(3, 1)]
    assert [v for v in vols if v > 0] == [F(3, 23), F(2, 23)]


def test_wrong_d_is_flagged_zero():
    a, b, g = (parse_angles(x) for x in WORKED_BOUNDARY)
    est = volume_summand(structure_graphs(3, 2)[0], a, b, g)
    assert est.value == 0 and "NotSolvable" in est.flags
