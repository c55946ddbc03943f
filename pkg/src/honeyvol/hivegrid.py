"""Triangular grid of the dual hive model and its color maps.

The grid ``H_{d,n}`` lives in the triangular lattice ``r + s*exp(i*pi/3)``
with vertex coordinates ``(v0, v1, v2) = (n+d-r-s, r, s)``.  Its vertex set is
the hexagon ``{v : 0 <= v_i <= n}``: the triangle of side ``n+d`` with the
three corner triangles of side ``d`` removed.  The boundary then consists of
six straight segments of alternating lengths ``n-d`` and ``d``, carrying the
``3n`` boundary labels.

An edge ``e = (v, v - exp(2*pi*i*l/3))`` has type ``l`` and height ``v_l``
(coordinate of the endpoint ``v``).  Around every triangular face the edge
types read ``0, 2, 1`` in the clockwise direction (plane drawn with the long
side horizontal, apex up, y axis up).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

from .errors import InvalidColorMap, InvalidSize

M = "m"
COLORS = (0, 1, 3, M)

#: Allowed clockwise color cycles around a face, up to rotation.
FACE_CYCLES = ((0, 0, 0), (1, 1, 1), (1, 0, 3), (0, 1, M))

#: Clockwise order of edge types around every face.
CLOCKWISE_TYPES = (0, 2, 1)

#: Segment names ``(type, tag)`` in counterclockwise order starting at the
#: bottom side.  ``(l, l)`` segments are the long sides (length ``n - d``),
#: the others are the cut corners (length ``d``).
SEGMENTS = ((0, 0), (2, 0), (1, 1), (0, 1), (2, 2), (1, 2))


def _rotations(cycle):
    return {tuple(cycle[i:] + cycle[:i]) for i in range(3)}


def allowed_face_colorings(mirror: bool = False) -> set:
    """Set of allowed ``(c0, c2, c1)`` tuples (colors listed clockwise by type).

    With ``mirror=True`` the cycles are read counterclockwise instead; used
    only to check that the convention matters.
    """
    out = set()
    for cyc in FACE_CYCLES:
        cyc = tuple(cyc)
        if mirror:
            cyc = tuple(reversed(cyc))
        out |= _rotations(list(cyc))
    return out


@dataclass(frozen=True)
class Edge:
    id: int
    a: int  # the endpoint ``v`` in ``(v, v - exp(2 pi i l / 3))``
    b: int
    type: int
    height: int


@dataclass(frozen=True)
class Face:
    id: int
    up: bool
    vertices: Tuple[int, int, int]
    edges: Tuple[int, int, int]  # indexed by type


@dataclass(frozen=True)
class Lozenge:
    """Two faces sharing ``middle``; ``sides[l]`` are the two type-``l`` edges."""

    middle: int
    faces: Tuple[int, int]
    sides: Dict[int, Tuple[int, int]]


@dataclass
class HiveGrid:
    n: int
    d: int
    coords: List[Tuple[int, int, int]]  # (v0, v1, v2) per vertex
    rs: List[Tuple[int, int]]
    edges: List[Edge]
    faces: List[Face]
    lozenges: List[Lozenge]
    edge_faces: List[Tuple[int, ...]]
    segments: Dict[Tuple[int, int], List[int]] = field(default_factory=dict)

    @property
    def side(self) -> int:
        return self.n + self.d

    def boundary_edges(self) -> List[int]:
        return [e.id for e in self.edges if len(self.edge_faces[e.id]) == 1]

    def interior_edges(self) -> List[int]:
        return [e.id for e in self.edges if len(self.edge_faces[e.id]) == 2]

    def segment_of(self) -> Dict[int, Tuple[int, int]]:
        out = {}
        for name, ids in self.segments.items():
            for i in ids:
                out[i] = name
        return out

    def boundary_colors(self) -> Dict[int, int]:
        """Forced colors: 0 on long sides, 1 on cut corners."""
        out = {}
        for (l, tag), ids in self.segments.items():
            for i in ids:
                out[i] = 0 if l == tag else 1
        return out

    def point(self, v: int) -> Tuple[float, float]:
        """Planar position of a vertex (for drawing)."""
        r, s = self.rs[v]
        return (r + 0.5 * s, s * 3 ** 0.5 / 2)


def build_grid(n: int, d: int) -> HiveGrid:
    """Construct ``H_{d,n}`` with canonical (row-major) ordering."""
    if n < 1 or d < 0 or d > n:
        raise InvalidSize(f"need n >= 1 and 0 <= d <= n, got n={n}, d={d}")
    N = n + d
    rs = []
    for s in range(N + 1):
        for r in range(N + 1 - s):
            v0 = N - r - s
            if v0 <= n and r <= n and s <= n:
                rs.append((r, s))
    index = {p: i for i, p in enumerate(rs)}
    coords = [(N - r - s, r, s) for r, s in rs]

    steps = {0: (-1, 0), 1: (1, -1), 2: (0, 1)}
    raw = []
    for vi, (r, s) in enumerate(rs):
        for l, (dr, ds) in steps.items():
            w = (r + dr, s + ds)
            if w in index:
                raw.append((l, coords[vi][l], vi, index[w]))
    raw.sort()
    edges = [Edge(i, a, b, l, h) for i, (l, h, a, b) in enumerate(raw)]
    by_pair = {frozenset((e.a, e.b)): e.id for e in edges}

    faces = []
    anchors = [(r, s) for s in range(N + 1) for r in range(N + 1 - s)]
    for r, s in anchors:
        up = [(r, s), (r + 1, s), (r, s + 1)]
        down = [(r + 1, s), (r, s + 1), (r + 1, s + 1)]
        for is_up, tri in ((True, up), (False, down)):
            if all(p in index for p in tri):
                vids = tuple(index[p] for p in tri)
                if is_up:
                    pairs = {0: (tri[0], tri[1]), 1: (tri[1], tri[2]), 2: (tri[0], tri[2])}
                else:
                    pairs = {0: (tri[1], tri[2]), 1: (tri[0], tri[1]), 2: (tri[0], tri[2])}
                eids = tuple(by_pair[frozenset((index[p], index[q]))] for p, q in (pairs[0], pairs[1], pairs[2]))
                for l in range(3):
                    assert edges[eids[l]].type == l
                faces.append((vids, is_up, eids))
    faces = [Face(i, up, v, e) for i, (v, up, e) in enumerate(faces)]

    edge_faces: List[List[int]] = [[] for _ in edges]
    for f in faces:
        for e in f.edges:
            edge_faces[e].append(f.id)
    edge_faces_t = [tuple(x) for x in edge_faces]

    lozenges = []
    for e in edges:
        fs = edge_faces_t[e.id]
        if len(fs) != 2:
            continue
        sides = {}
        for l in range(3):
            if l == e.type:
                continue
            sides[l] = (faces[fs[0]].edges[l], faces[fs[1]].edges[l])
        lozenges.append(Lozenge(e.id, (fs[0], fs[1]), sides))

    grid = HiveGrid(n, d, coords, rs, edges, faces, lozenges, edge_faces_t)
    grid.segments = _segments(grid)
    return grid


def _segments(grid: HiveGrid) -> Dict[Tuple[int, int], List[int]]:
    n, d = grid.n, grid.d
    segs: Dict[Tuple[int, int], List[int]] = {s: [] for s in SEGMENTS}
    for eid in grid.boundary_edges():
        e = grid.edges[eid]
        ca, cb = grid.coords[e.a], grid.coords[e.b]
        # the constant coordinate of a type-l edge is v_{l-1}
        const = (e.type - 1) % 3
        val = ca[const]
        assert val == cb[const]
        if val == 0:
            name = (e.type, e.type)
        elif val == n:
            name = (e.type, (e.type + 1) % 3)
        else:  # pragma: no cover - geometry guarantees one of the two
            raise AssertionError("boundary edge off the hexagon sides")
        segs[name].append(eid)
    for name in segs:
        segs[name].sort(key=lambda i: -grid.edges[i].height)
    return segs


def boundary_segments(grid: HiveGrid) -> Dict[Tuple[int, int], List[int]]:
    """The six boundary segments, each sorted by decreasing height."""
    return {k: list(v) for k, v in grid.segments.items()}


def segment_lengths(n: int, d: int) -> Dict[Tuple[int, int], int]:
    return {s: (n - d if s[0] == s[1] else d) for s in SEGMENTS}


# ---------------------------------------------------------------------------
# Color maps
# ---------------------------------------------------------------------------


ColorMap = Tuple  # tuple indexed by edge id, entries in COLORS


def face_cycle(grid: HiveGrid, colors: Sequence, face: Face) -> tuple:
    return tuple(colors[face.edges[l]] for l in CLOCKWISE_TYPES)


@dataclass
class ColorViolation:
    face: Optional[int]
    observed: tuple
    message: str


def validate_color_map(grid: HiveGrid, colors: Sequence, mirror: bool = False) -> Optional[ColorViolation]:
    """Return ``None`` if legal, otherwise the first violation found."""
    if len(colors) != len(grid.edges):
        return ColorViolation(None, (), "color map does not cover every edge")
    for c in colors:
        if c not in COLORS:
            return ColorViolation(None, (c,), f"unknown color {c!r}")
    forced = grid.boundary_colors()
    for eid, c in sorted(forced.items()):
        if colors[eid] != c:
            return ColorViolation(grid.edge_faces[eid][0], (colors[eid],), f"boundary edge {eid} must be colored {c}")
    allowed = allowed_face_colorings(mirror)
    for f in grid.faces:
        cyc = face_cycle(grid, colors, f)
        if cyc not in allowed:
            return ColorViolation(f.id, cyc, f"face {f.id} has illegal clockwise cycle {cyc}")
    return None


def require_color_map(grid: HiveGrid, colors: Sequence) -> None:
    bad = validate_color_map(grid, colors)
    if bad is not None:
        raise InvalidColorMap(bad.message)


def enumerate_color_maps(grid: HiveGrid, mirror: bool = False) -> List[ColorMap]:
    """All legal color maps, in a deterministic (lexicographic DFS) order."""
    allowed = sorted(allowed_face_colorings(mirror), key=str)
    colors: List = [None] * len(grid.edges)
    for eid, c in grid.boundary_colors().items():
        colors[eid] = c
    faces = grid.faces
    out: List[ColorMap] = []

    def rec(k: int):
        if k == len(faces):
            out.append(tuple(colors))
            return
        f = faces[k]
        eids = [f.edges[l] for l in CLOCKWISE_TYPES]
        for cyc in allowed:
            ok = True
            assigned = []
            for eid, c in zip(eids, cyc):
                cur = colors[eid]
                if cur is None:
                    colors[eid] = c
                    assigned.append(eid)
                elif cur != c:
                    ok = False
                    break
            if ok:
                rec(k + 1)
            for eid in assigned:
                colors[eid] = None

    rec(0)
    return out


def m_count(colors: Sequence) -> int:
    return sum(1 for c in colors if c == M)


def dump_color_map(grid: HiveGrid, colors: Sequence) -> str:
    """Serialize as ``edgeId:color`` lines with a commented grid header."""
    lines = [f"# hive grid n={grid.n} d={grid.d}; edge ids in canonical order (type, height, endpoint)"]
    for e in grid.edges:
        lines.append(f"{e.id}:{colors[e.id]}")
    return "\n".join(lines) + "\n"


def load_color_map(text: str, grid: Optional[HiveGrid] = None) -> Tuple[Optional[Tuple[int, int]], ColorMap]:
    """Parse :func:`dump_color_map` output.  Returns ``((n, d) or None, colors)``."""
    nd = None
    entries = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = line.strip()
        if not line:
            continue
        if line.startswith("#"):
            if "n=" in line and "d=" in line:
                toks = dict(t.split("=") for t in line.replace(";", " ").split() if "=" in t)
                nd = (int(toks["n"]), int(toks["d"]))
            continue
        try:
            k, v = line.split(":")
            eid = int(k)
            col = M if v.strip() == M else int(v)
        except ValueError as exc:
            raise ValueError(f"line {lineno}: cannot parse {line!r}") from exc
        if col not in COLORS:
            raise ValueError(f"line {lineno}: unknown color {v!r}")
        entries[eid] = col
    size = len(grid.edges) if grid is not None else (max(entries) + 1 if entries else 0)
    if sorted(entries) != list(range(size)):
        raise ValueError("color map must list every edge id exactly once")
    return nd, tuple(entries[i] for i in range(size))
