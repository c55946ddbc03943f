import itertools
import math
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.integrate import quad
from scipy.stats import ks_2samp

from honeyvol.assembler import pants_surface, z_gp
from honeyvol.classes import AngleVector, complement, standardize
from honeyvol.errors import InvalidTree, NonpositiveTime, NotRegular
from honeyvol.yangmills import (LoopTree, characters, circle_heat_kernel, cylinder_z, disc_z, disc_z_dyson,
                                dyson_kernel, dyson_kernel_series, haar_unitary, lattice_oracle,
                                lattice_oracle_closed, lattice_scale, load_loop_tree, orbit_product_sampler,
                                rho_norm2, slice_histogram, weight_table, ym_marginal, ym_smoothed)

DATA = Path(__file__).resolve().parents[1] / "data"
TRIPLE = [standardize(x) for x in ((0.8, 0.45, 0.1), (0.7, 0.4, 0.15), (0.9, 0.5, 0.2))]


# -- circle and Dyson kernels ------------------------------------------------

def test_circle_kernel_flattens():
    assert circle_heat_kernel(50.0, 0.3, 2.0) == pytest.approx(1 / (2 * math.pi), rel=1e-9)


@given(st.floats(0.05, 3.0), st.floats(0, 2 * math.pi), st.floats(0, 2 * math.pi))
def test_circle_kernel_symmetric_and_branch_consistent(T, x, y):
    k = circle_heat_kernel(T, x, y)
    assert k == pytest.approx(circle_heat_kernel(T, y, x), rel=1e-9, abs=1e-300)
    assert circle_heat_kernel(T, x + 2 * math.pi, y) == pytest.approx(k, rel=1e-9, abs=1e-300)


def test_twisted_kernel_is_antiperiodic():
    k = circle_heat_kernel(0.7, 0.4, 1.1, twisted=True)
    assert circle_heat_kernel(0.7, 0.4 + 2 * math.pi, 1.1, twisted=True) == pytest.approx(-k, rel=1e-10)


@pytest.mark.parametrize("T", [0.3, 1.5])
def test_circle_semigroup(T):
    lhs = quad(lambda z: circle_heat_kernel(T, 0.2, z) * circle_heat_kernel(T, z, 4.0), 0, 2 * math.pi,
               epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    assert lhs == pytest.approx(circle_heat_kernel(2 * T, 0.2, 4.0), rel=1e-9)


def test_nonpositive_time():
    with pytest.raises(NonpositiveTime):
        circle_heat_kernel(0.0, 0.1, 0.2)


def test_rho_norm():
    assert [rho_norm2(n) for n in (1, 2, 3, 4)] == [0.0, 0.5, 2.0, 5.0]


@pytest.mark.parametrize("n,T", [(2, 0.4), (3, 0.5), (3, 1.2), (4, 0.8)])
def test_dyson_kernel_matches_character_series(n, T):
    rng = np.random.default_rng(n)
    x, y = (-np.sort(-rng.random(n)) for _ in range(2))
    assert dyson_kernel(T, x, y) == pytest.approx(dyson_kernel_series(T, x, y), rel=1e-8)


def test_dyson_kernel_needs_regular_classes():
    with pytest.raises(NotRegular):
        dyson_kernel(0.5, [0.5, 0.5, 0.1], [0.7, 0.3, 0.1])


# -- characters and lattice sums ---------------------------------------------

def test_characters_at_identity_are_dimensions():
    table = weight_table(3, 4)
    assert np.allclose(characters(table, [0.0, 0.0, 0.0]), table.dims)


def test_characters_n2_match_complete_homogeneous_sum():
    table = weight_table(2, 3)
    a = np.array([0.71, 0.23])
    x = np.exp(2j * np.pi * a)
    want = [(x[0] * x[1]) ** l2 * sum(x[0] ** k * x[1] ** (l1 - l2 - k) for k in range(l1 - l2 + 1))
            for l1, l2 in table.weights]
    assert np.allclose(characters(table, a), want)


def test_closed_n2_torus_series_by_direct_sum():
    T = 0.7
    want = sum(math.exp(-T * (((l1 + 1) - 0.5) ** 2 + (l2 - 0.5) ** 2 - 0.5) / 2)
               for l1, l2 in itertools.product(range(-60, 61), repeat=2) if l1 >= l2)
    assert lattice_oracle_closed(2, 1, T, rel_tol=1e-12) == pytest.approx(want, rel=1e-9)


def test_closed_lattice_decreases_with_time():
    vals = [lattice_oracle_closed(2, 2, T) for T in (0.2, 0.5, 1.0, 2.0)]
    assert all(a > b for a, b in zip(vals, vals[1:]))


def test_u1_series():
    want = sum(math.exp(-0.5 * k * k / 2) for k in range(-100, 101))
    assert lattice_oracle_closed(1, 1, 0.5) == pytest.approx(want, rel=1e-9)


@pytest.mark.parametrize("A", [0.3, 0.8])
def test_disc_two_routes(A):
    alpha = standardize([0.8, 0.45, 0.1])
    assert disc_z_dyson(A, alpha) == pytest.approx(disc_z(A, alpha), rel=1e-6)


def test_cylinder_is_dyson_kernel_over_vandermonde_square():
    a1, a2 = standardize([0.7, 0.3, 0.1]), standardize([0.6, 0.35, 0.2])
    val = cylinder_z(0.5, a1, a2)
    series = lattice_oracle(0, 2, 0.5, [a1, complement(a2)])
    assert val == pytest.approx(series, rel=1e-6)


# -- smoothed honeycomb volumes ----------------------------------------------

def test_smoothed_value_scales_with_constant():
    spec = pants_surface(0, 3)
    e1 = ym_smoothed(spec, 0.5, TRIPLE, samples=20_000, seed=4, constant=1.0)
    e2 = ym_smoothed(spec, 0.5, TRIPLE, samples=20_000, seed=4, constant=2.5)
    assert e2.value == pytest.approx(2.5 * e1.value, rel=1e-12)


def test_smoothed_pants_tracks_lattice_ratio():
    # the ratio lattice / smoothed (unit constant) is the same at two triples
    spec = pants_surface(0, 3)
    other = [standardize(x) for x in ((0.6, 0.35, 0.2), (0.85, 0.3, 0.05), (0.95, 0.6, 0.3))]
    ratios = []
    for trip in (TRIPLE, other):
        sm = ym_smoothed(spec, 0.5, trip, samples=400_000, seed=1, constant=1.0)
        ratios.append((lattice_oracle(0, 3, 0.5, trip) / sm.value, sm.stderr / sm.value))
    (r1, e1), (r2, e2) = ratios
    assert abs(r1 - r2) / r1 < 4 * math.hypot(e1, e2) + 0.01


# -- loop trees --------------------------------------------------------------

def test_seven_vertex_tree_parses():
    tree = load_loop_tree((DATA / "seven_vertex_tree.json").read_text())
    assert len(tree.vertices) == 7 and len(tree.loops) == 7
    assert [tree.degree(v) for v in sorted(tree.vertices)] == [1, 4, 3, 1, 3, 1, 1]
    args = tree.arguments(2)
    assert np.allclose(args[1].as_array(), complement(args[2]).as_array())
    assert load_loop_tree(tree.to_json()).loops == tree.loops


def test_invalid_trees():
    a = standardize([0.7, 0.4, 0.1])
    with pytest.raises(InvalidTree):
        LoopTree({1: (0.1, 0), 2: (0.1, 0)}, []).validate()
    with pytest.raises(InvalidTree):
        LoopTree({1: (0.1, 0)}, [(1, 3, a)]).validate()
    with pytest.raises(InvalidTree):
        LoopTree({1: (0.1, 0), 2: (0.1, 0)}, [(1, 2, AngleVector((0.5, 0.5, 0.1)))]).validate()
    with pytest.raises(InvalidTree):
        load_loop_tree("{not json")
    with pytest.raises(InvalidTree):
        ym_marginal(LoopTree({1: (0.0, 0), 2: (0.1, 0)}, [(1, 2, a), (1, 2, standardize([0.6, 0.3, 0.1]))]))


def test_flat_single_vertex_is_scaled_volume():
    a, b, c = (standardize(x) for x in ((14 / 23, 7 / 23, 2 / 23), (18 / 23, 10 / 23, 3 / 23),
                                        (21 / 23, 13 / 23, 4 / 23)))
    loops = [(0, 1, a), (0, 2, b), (0, 3, c)]
    z = z_gp(pants_surface(0, 3), [a, b, c], method="exact").value
    # zero-area leaves are delta functions at the identity: they vanish on regular classes
    assert ym_marginal(LoopTree({0: (0.0, 0), 1: (0.0, 0), 2: (0.0, 0), 3: (0.0, 0)}, loops)).value == 0.0
    est = ym_marginal(LoopTree({0: (0.0, 0), 1: (0.2, 0), 2: (0.2, 0), 3: (0.2, 0)}, loops), normalization="volume")
    assert est.factors[0]["route"] == "flat"
    assert est.factors[0]["value"] == pytest.approx(z, rel=1e-12)
    assert lattice_scale(0, 3, 3) == 1.0 and lattice_scale(1, 1, 3) == 1.0 and lattice_scale(0, 4, 3) == 3.0


def test_marginal_disc_and_cylinder_routes():
    a = TRIPLE[0]
    tree = LoopTree({0: (0.3, 0), 1: (0.4, 0)}, [(0, 1, a)])
    est = ym_marginal(tree)
    assert [f["route"] for f in est.factors] == ["disc-series", "disc-series"]
    assert est.value == pytest.approx(disc_z(0.3, a) * disc_z(0.4, complement(a)), rel=1e-12)


# -- orbit sampler -----------------------------------------------------------

def test_haar_is_unitary():
    U = haar_unitary(3, 50, np.random.default_rng(0))
    eye = np.einsum("kij,kil->kjl", U.conj(), U)
    assert np.allclose(eye, np.eye(3)[None])


def test_orbit_n1_is_point_mass():
    s = orbit_product_sampler([0.3], [0.5], 100, seed=1)
    assert np.allclose(s[:, 0], 0.2)


def test_orbit_residue_is_fixed():
    a, b = [0.8, 0.45, 0.1], [0.7, 0.4, 0.15]
    s = orbit_product_sampler(a, b, 2000, seed=2)
    r = np.mod(s.sum(axis=1) + sum(a) + sum(b), 1.0)
    assert np.allclose(np.minimum(r, 1 - r), 0, atol=1e-9)


def test_orbit_law_symmetric_in_arguments():
    a, b = [0.8, 0.45, 0.1], [0.7, 0.4, 0.15]
    s1 = orbit_product_sampler(a, b, 20_000, seed=3)
    s2 = orbit_product_sampler(b, a, 20_000, seed=4)
    assert ks_2samp(s1[:, 0], s2[:, 0]).pvalue > 1e-3
    counts, edges = slice_histogram(s1, bins=10)
    assert counts.sum() == 20_000 and len(edges) == 11
