import itertools
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeyvol.acceptance import brute_force_tree_count, random_spanning_tree
from honeyvol.errors import Disconnected, NotCotree, NotSolvable, NotUnivalent, Overlap
from honeyvol.flows import (FlowGraph, bareiss_determinant, check_solvable, cotree, disjoint_union, divergence,
                            dump_graph, find_spanning_tree, load_graph, sieve, solve_flow, solve_flow_matrix,
                            spanning_tree_count, volume_normalizer)


@st.composite
def connected_graphs(draw, max_vertices=7):
    nv = draw(st.integers(2, max_vertices))
    # random tree plus extra (possibly parallel) edges
    edges = [(draw(st.integers(0, v - 1)), v) for v in range(1, nv)]
    extra = draw(st.lists(st.tuples(st.integers(0, nv - 1), st.integers(0, nv - 1)), max_size=6))
    edges += [(a, b) for a, b in extra if a != b]
    return FlowGraph(nv, edges)


@pytest.mark.parametrize("k", range(2, 8))
def test_cayley_formula(k):
    assert spanning_tree_count(FlowGraph(k, list(itertools.combinations(range(k), 2)))) == k ** (k - 2)


def test_cycle_and_multi_edges():
    assert spanning_tree_count(FlowGraph(6, [(i, (i + 1) % 6) for i in range(6)])) == 6
    assert spanning_tree_count(FlowGraph(2, [(0, 1)] * 4)) == 4
    assert volume_normalizer(FlowGraph(2, [(0, 1)] * 4)) == 0.5


@settings(max_examples=60)
@given(connected_graphs())
def test_matrix_tree_matches_brute_force(g):
    assert spanning_tree_count(g) == brute_force_tree_count(g.n_vertices, g.edges)


@given(st.lists(st.lists(st.integers(-6, 6), min_size=4, max_size=4), min_size=4, max_size=4))
def test_bareiss_matches_float_determinant(M):
    assert bareiss_determinant(M) == round(np.linalg.det(np.array(M, dtype=float)))


@settings(max_examples=60)
@given(connected_graphs(), st.randoms(use_true_random=False))
def test_flow_round_trip_is_exact(g, rnd):
    phi = [F(rnd.randint(-9, 9), rnd.randint(1, 5)) for _ in range(g.n_vertices)]
    phi[0] -= sum(phi)
    S = cotree(g, random_spanning_tree(g, np.random.default_rng(rnd.randint(0, 10 ** 6))))
    vals = [F(rnd.randint(-9, 9), 7) for _ in S]
    omega = solve_flow(g, phi, S, vals)
    assert divergence(g, omega) == phi
    assert [omega[e] for e in S] == vals
    A, B = solve_flow_matrix(g, S)
    lin = A @ np.array(phi, dtype=object) + B @ np.array(vals, dtype=object)
    assert list(lin) == omega


def test_integer_data_gives_integer_flow():
    g = FlowGraph(4, [(0, 1), (1, 2), (2, 3), (0, 3), (0, 2)])
    omega = solve_flow(g, [3, -1, 0, -2], cotree(g), [5, -4])
    assert all(isinstance(x, int) for x in omega)


def test_errors():
    g = FlowGraph(3, [(0, 1), (1, 2), (0, 2)])
    with pytest.raises(NotSolvable):
        solve_flow(g, [1, 0, 0], cotree(g), [0])
    with pytest.raises(NotCotree):
        solve_flow(g, [0, 0, 0], [], [])
    with pytest.raises(Disconnected):
        find_spanning_tree(FlowGraph(3, [(0, 1)]))
    assert not check_solvable(g, [1, 0, 0])
    with pytest.raises(ValueError):
        FlowGraph(2, [(1, 1)])


def test_sieve_merges_univalent_pairs():
    path = FlowGraph(2, [(0, 1)])
    union, offs = disjoint_union([path, path])
    merged, vmap, _ = sieve(union, [1], [offs[1]])
    assert merged.n_vertices == 3 and merged.n_edges == 2 and merged.is_connected()
    assert vmap[offs[1]] == vmap[1]
    star = FlowGraph(4, [(0, 1), (0, 2), (0, 3)])
    with pytest.raises(NotUnivalent):
        sieve(star, [0], [1])
    with pytest.raises(Overlap):
        sieve(star, [1], [1])


def test_graph_text_round_trip():
    g = FlowGraph(3, [(0, 1), (1, 2), (2, 0)], ["0", "1", "m"])
    h = load_graph(dump_graph(g))
    assert h.edges == g.edges and h.payload == g.payload
    with pytest.raises(ValueError):
        load_graph("3 2\n0 1\n")
