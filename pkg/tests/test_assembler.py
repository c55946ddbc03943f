import json
import math
from fractions import Fraction as F
from pathlib import Path

import numpy as np
import pytest

from honeyvol.acceptance import WORKED_BOUNDARY, _quad_boundaries
from honeyvol.assembler import (SurfaceSpec, c03, c03_default, expected_counts, pants_surface, prefactor,
                                save_calibration, self_glue_shift, spec_from_json, total_d, z03, z_gp)
from honeyvol.classes import complement, parse_angles, standardize, vandermonde
from honeyvol.errors import InvalidTopology, NotSolvable

DATA = Path(__file__).resolve().parents[1] / "data"


def worked_pants():
    a, b, g = (parse_angles(x) for x in WORKED_BOUNDARY)
    return a, b, complement(g)


@pytest.mark.parametrize("g,p", [(0, 3), (0, 4), (0, 5), (1, 1), (1, 2), (2, 0), (2, 1)])
def test_caterpillar_surfaces_are_valid(g, p):
    spec = pants_surface(g, p)
    assert spec.N == p + 2 * g - 2
    assert len(spec.free) == p
    assert 2 * len(spec.gluings) == 3 * spec.N - p
    assert spec_from_json(spec.to_json())[0] == spec


@pytest.mark.parametrize("g,p", [(0, 2), (1, 0), (0, 0)])
def test_degenerate_topologies_rejected(g, p):
    with pytest.raises(InvalidTopology):
        pants_surface(g, p)


def test_slot_reuse_rejected():
    with pytest.raises(InvalidTopology):
        SurfaceSpec(0, 4, 2, (((0, 2), (1, 1)),), ((0, 0), (0, 1), (1, 0), (0, 2))).validate()


def test_vertex_counts_by_construction():
    # sieving merges n vertex pairs per gluing; the closed formula is reported alongside
    assert expected_counts(pants_surface(0, 4), 3) == (36, 33, 21)
    assert expected_counts(pants_surface(1, 1), 3) == (18, 15, 9)


def test_total_d():
    a, b, c = worked_pants()
    assert total_d(pants_surface(0, 3), 3, [a, b, c]) == 1  # the d = 1 grid
    assert total_d(pants_surface(1, 1), 3, [a]) == F(23, 23)


def test_worked_instance_value_is_prefactor_times_cell_volumes():
    a, b, c = worked_pants()
    want = c03_default(3) * F(5, 23) / (vandermonde(a) * vandermonde(b) * vandermonde(c))
    assert z03(a, b, c, method="exact").value == pytest.approx(float(want), rel=1e-12)
    assert z03(a, b, c, method="exact").value == pytest.approx(0.013792111497312498, rel=1e-12)


def test_pants_file_matches_worked_boundary():
    spec, data = spec_from_json((DATA / "pants_03.json").read_text())
    bnds = [parse_angles(x) for x in data["boundaries"]]
    assert z_gp(spec, bnds, method="exact").value == pytest.approx(0.013792111497312498, rel=1e-12)


def test_non_integral_total_is_not_solvable():
    a, b, _ = worked_pants()
    with pytest.raises(NotSolvable):
        z03(a, b, parse_angles("1/2,1/3,1/5"))


def test_value_scales_with_constant_power():
    bnds = _quad_boundaries(np.random.default_rng(0))
    spec = pants_surface(0, 4)
    z1 = z_gp(spec, bnds, method="exact", constant=1.0).value
    z2 = z_gp(spec, bnds, method="exact", constant=3.0).value
    assert z2 == pytest.approx(9 * z1, rel=1e-12)


def test_decomposition_independence_exact():
    bnds = _quad_boundaries(np.random.default_rng(1))
    vals = [z_gp(pants_surface(0, 4, h), bnds, method="exact").value for h in [(2, 1), (0, 0), (1, 2)]]
    assert vals[1] == pytest.approx(vals[0], rel=1e-9)
    assert vals[2] == pytest.approx(vals[0], rel=1e-9)


def test_direct_and_iterated_one_holed_torus():
    spec = pants_surface(1, 1)
    bnd = [standardize([0.7, 0.25, 0.05])]
    direct = z_gp(spec, bnd, method="exact").value
    it = z_gp(spec, bnd, method="iterated", samples=40_000, seed=3)
    assert abs(it.value - direct) < 4 * it.stderr


def test_self_glue_shift_is_zero_sum_and_tiny():
    for n in (2, 3, 4):
        s = self_glue_shift(n, exact=True)
        assert sum(s) == 0 and max(abs(x) for x in s) < 1e-8
        assert abs(sum(self_glue_shift(n))) < 1e-20


def test_prefactor_formula():
    a, b, c = worked_pants()
    spec = pants_surface(0, 4)
    d = standardize([0.5, 0.3, 0.1])
    want = 2.0 ** 2 / (3 * vandermonde(a) * vandermonde(b) * vandermonde(c) * vandermonde(d))
    assert prefactor(spec, 3, [a, b, c, d], constant=2.0) == pytest.approx(want, rel=1e-12)


def test_calibration_store_round_trip(tmp_path, monkeypatch):
    path = tmp_path / "cal.json"
    monkeypatch.setenv("HONEYVOL_CALIBRATION", str(path))
    assert c03(3) == c03_default(3)
    save_calibration(3, 495.0)
    assert json.loads(path.read_text()) == {"n=3": 495.0}
    assert c03(3) == 495.0
    assert c03(3, calibrated=False) == pytest.approx(2 * math.pi ** 2 / 3)
