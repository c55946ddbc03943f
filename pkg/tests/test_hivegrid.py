import itertools

import pytest

from honeyvol.errors import InvalidColorMap, InvalidSize
from honeyvol.hivegrid import (COLORS, M, build_grid, dump_color_map, enumerate_color_maps, load_color_map,
                               m_count, require_color_map, segment_lengths, validate_color_map)

# counts produced by the backtracking enumerator (frozen); the small ones are
# re-derived below by exhaustive search over every interior coloring
MAP_COUNTS = {1: [1, 1], 2: [1, 3, 1], 3: [1, 9, 9, 1], 4: [1, 29, 72, 29, 1]}


def brute_force_count(n, d):
    grid = build_grid(n, d)
    free = grid.interior_edges()
    base = [None] * len(grid.edges)
    for eid, c in grid.boundary_colors().items():
        base[eid] = c
    count = 0
    for choice in itertools.product(COLORS, repeat=len(free)):
        colors = list(base)
        for eid, c in zip(free, choice):
            colors[eid] = c
        count += validate_color_map(grid, colors) is None
    return count


@pytest.mark.parametrize("n,d", [(1, 0), (1, 1), (2, 0), (2, 1), (2, 2), (3, 0), (3, 3)])
def test_enumerator_matches_exhaustive_search(n, d):
    assert len(enumerate_color_maps(build_grid(n, d))) == brute_force_count(n, d) == MAP_COUNTS[n][d]


@pytest.mark.parametrize("n", [1, 2, 3, 4])
def test_frozen_counts(n):
    assert [len(enumerate_color_maps(build_grid(n, d))) for d in range(n + 1)] == MAP_COUNTS[n]


@pytest.mark.parametrize("n,d", [(3, 1), (3, 2), (4, 2)])
def test_every_map_is_legal_with_m_count(n, d):
    grid = build_grid(n, d)
    for cm in enumerate_color_maps(grid):
        assert validate_color_map(grid, cm) is None
        assert m_count(cm) == d * (n - d)


def test_grid_shape():
    grid = build_grid(3, 1)
    assert grid.side == 4
    assert len(grid.faces) == 13
    assert sum(len(ids) for ids in grid.segments.values()) == len(grid.boundary_edges())
    assert segment_lengths(3, 1) == {(0, 0): 2, (2, 0): 1, (1, 1): 2, (0, 1): 1, (2, 2): 2, (1, 2): 1}


def test_invalid_size():
    with pytest.raises(InvalidSize):
        build_grid(3, 4)
    with pytest.raises(InvalidSize):
        build_grid(0, 0)


def test_violation_is_reported():
    grid = build_grid(3, 1)
    cm = list(enumerate_color_maps(grid)[0])
    e = grid.interior_edges()[0]
    cm[e] = M if cm[e] != M else 0
    bad = validate_color_map(grid, cm)
    assert bad is not None and bad.face is not None
    with pytest.raises(InvalidColorMap):
        require_color_map(grid, cm)


def test_dump_load_round_trip():
    grid = build_grid(4, 2)
    for cm in enumerate_color_maps(grid)[:5]:
        nd, back = load_color_map(dump_color_map(grid, cm), grid)
        assert nd == (4, 2) and tuple(back) == tuple(cm)
