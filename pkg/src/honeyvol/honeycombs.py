"""Structure graphs of colored honeycombs built from color maps of the hive grid.

A color map ``C`` is turned into its reduced graph ``G^C``:

* grid edges colored ``m`` glue the two equal-type sides of their lozenge
  into *chains*; each chain is one edge of ``G^C`` (color = the non-``m``
  color it carries, type = its grid type);
* vertices are the grid faces not touching an ``m`` edge (trivalent) plus one
  univalent vertex per boundary grid edge.

Labels of the dual hive become heights of honeycomb segments, and the hive's
face rule ``L(e0) + L(e1) + L(e2) = 1`` becomes the divergence equation
``div(omega) = s`` for the signed flow ``omega(v, w) = s(v) * L``.

Boundary data is given in *hive* convention: a triple ``(alpha, beta, gamma)``
with ``|alpha| + |beta| = |gamma| + d``.  The honeycomb drawn in the triangle
then has the classes ``beta``, ``alpha`` and ``tilde(gamma)`` on its sides
0, 1 and 2 (side ``i`` being ``{x_i = 0}``, values read on coordinate
``x_{i+1}``).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classes import AngleVector, tilde
from .errors import GeometryViolation, InvalidColorMap, NotRegular, NotSolvable
from .flows import FlowGraph, check_solvable
from .hivegrid import M, HiveGrid, validate_color_map

#: For every boundary segment (listed by decreasing edge height): the
#: honeycomb side it feeds, whether it is a long side (label = value) or a
#: cut (label = 1 - value), and the index sequence ``j`` (1-based) into the
#: class sitting on that side.
def _segment_rule(name: Tuple[int, int], n: int, d: int) -> Tuple[int, bool, List[int]]:
    rules = {
        (0, 1): (1, False, list(range(d, 0, -1))),
        (2, 2): (1, True, list(range(d + 1, n + 1))),
        (2, 0): (0, False, list(range(d, 0, -1))),
        (1, 1): (0, True, list(range(d + 1, n + 1))),
        (1, 2): (2, False, list(range(d, 0, -1))),
        (0, 0): (2, True, list(range(d + 1, n + 1))),
    }
    return rules[name]


@dataclass(frozen=True)
class BoundarySlot:
    """Where a boundary grid edge sits on the honeycomb triangle."""

    edge: int  # grid edge id
    side: int  # honeycomb side 0, 1, 2
    index: int  # 1-based position in the class on that side
    long: bool  # True: color 0, label = value; False: color 1, label = 1 - value


def boundary_slots(grid: HiveGrid) -> Dict[int, BoundarySlot]:
    out = {}
    for name, ids in grid.segments.items():
        side, long, js = _segment_rule(name, grid.n, grid.d)
        assert len(js) == len(ids)
        for eid, j in zip(ids, js):
            out[eid] = BoundarySlot(eid, side, j, long)
    return out


def side_classes(alpha, beta, gamma) -> Tuple[tuple, tuple, tuple]:
    """Honeycomb side classes ``(beta, alpha, tilde(gamma))`` from hive data."""
    return (tuple(beta), tuple(alpha), tuple(tilde(_as_av(gamma))))


def _as_av(x) -> AngleVector:
    return x if isinstance(x, AngleVector) else AngleVector(tuple(x))


def side_boundary_labels(grid: HiveGrid, sides) -> Dict[int, object]:
    """Labels of boundary grid edges from the three side classes."""
    out = {}
    for eid, slot in boundary_slots(grid).items():
        value = sides[slot.side][slot.index - 1]
        out[eid] = value if slot.long else 1 - value
    return out


def hive_boundary_labels(grid: HiveGrid, alpha, beta, gamma) -> Dict[int, object]:
    """Labels of boundary grid edges for hive boundary ``(alpha, beta, gamma)``."""
    return side_boundary_labels(grid, side_classes(alpha, beta, gamma))


# ---------------------------------------------------------------------------
# Reduced graph
# ---------------------------------------------------------------------------


@dataclass
class StructureGraph:
    grid: HiveGrid
    colors: tuple  # the color map
    graph: FlowGraph
    edge_color: List[int]
    edge_type: List[int]
    chains: List[List[int]]  # grid edges of each G edge
    grid_to_chain: Dict[int, int]
    vertex_kind: List[Tuple[str, int]]  # ("face", face id) or ("boundary", grid edge id)
    sign: List[int]
    coords: List[Optional[Tuple[int, int, int]]]
    boundary_order: List[int]  # univalent vertices, sides 0,1,2 then index 1..n
    slots: Dict[int, BoundarySlot]

    @property
    def n(self) -> int:
        return self.grid.n

    @property
    def d(self) -> int:
        return self.grid.d

    @property
    def color_number(self) -> int:
        """Number of color-1 edges at univalent vertices on side 0."""
        cnt = 0
        for v in self.boundary_order:
            (_, e) = self.graph.adjacency()[v][0]
            if self.edge_color[e] == 1 and self.slots[self.vertex_kind[v][1]].side == 0:
                cnt += 1
        return cnt

    def face_vertex(self) -> Dict[int, int]:
        return {k[1]: v for v, k in enumerate(self.vertex_kind) if k[0] == "face"}

    def grid_label_forms(self) -> Dict[int, Dict[int, int]]:
        """Every grid edge's label as an integer combination of G-edge heights.

        Returned as ``{grid edge: {G edge: coeff, -1: constant}}``; ``m``
        edges are ``1 - L(a) - L(b)`` over the other two edges of a face.
        """
        forms: Dict[int, Dict[int, int]] = {}
        for eid, c in enumerate(self.colors):
            if c != M:
                forms[eid] = {self.grid_to_chain[eid]: 1}
        for eid, c in enumerate(self.colors):
            if c == M:
                f = self.grid.faces[self.grid.edge_faces[eid][0]]
                form = {-1: 1}
                for other in f.edges:
                    if other == eid:
                        continue
                    ch = self.grid_to_chain[other]
                    form[ch] = form.get(ch, 0) - 1
                forms[eid] = form
        return forms


def _face_sign(up: bool) -> int:
    # Upward grid faces are dual to honeycomb vertices whose segments leave
    # towards increasing x_{l+1}; see the realization validator.
    return 1 if up else -1


def reduce(grid: HiveGrid, colors: Sequence) -> StructureGraph:
    """Build the reduced graph ``G^C`` of a color map."""
    colors = tuple(colors)
    bad = validate_color_map(grid, colors)
    if bad is not None:
        raise InvalidColorMap(bad.message)
    E = grid.edges
    parent = {e.id: e.id for e in E if colors[e.id] != M}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    m_faces = set()
    for lz in grid.lozenges:
        if colors[lz.middle] != M:
            continue
        m_faces.update(lz.faces)
        for l, (a, b) in lz.sides.items():
            if colors[a] == M or colors[b] == M:
                raise InvalidColorMap("m edge adjacent to another m edge")
            if colors[a] != colors[b]:
                raise InvalidColorMap(f"chain through m edge {lz.middle} changes color")
            ra, rb = find(a), find(b)
            if ra != rb:
                parent[max(ra, rb)] = min(ra, rb)

    classes: Dict[int, List[int]] = {}
    for eid in sorted(parent):
        classes.setdefault(find(eid), []).append(eid)

    vertex_kind: List[Tuple[str, int]] = []
    face_vid = {}
    for f in grid.faces:
        if f.id not in m_faces:
            face_vid[f.id] = len(vertex_kind)
            vertex_kind.append(("face", f.id))
    bnd_vid = {}
    for eid in grid.boundary_edges():
        bnd_vid[eid] = len(vertex_kind)
        vertex_kind.append(("boundary", eid))

    g_edges, chains, ecolor, etype, payload = [], [], [], [], []
    grid_to_chain = {}
    for root in sorted(classes):
        members = classes[root]
        ends = []
        for eid in members:
            for fid in grid.edge_faces[eid]:
                if fid in face_vid:
                    ends.append(face_vid[fid])
            if eid in bnd_vid:
                ends.append(bnd_vid[eid])
        if len(ends) != 2:
            raise InvalidColorMap(f"chain {members} has {len(ends)} endpoints")
        cid = len(chains)
        for eid in members:
            grid_to_chain[eid] = cid
        chains.append(members)
        g_edges.append(tuple(ends))
        ecolor.append(colors[members[0]])
        etype.append(E[members[0]].type)
        payload.append(f"{colors[members[0]]}/{E[members[0]].type}")

    graph = FlowGraph(len(vertex_kind), g_edges, payload)
    # FlowGraph normalizes orientation; chains keep their order
    sign = [0] * len(vertex_kind)
    for fid, v in face_vid.items():
        sign[v] = _face_sign(grid.faces[fid].up)
    adj = graph.adjacency()
    for eid, v in bnd_vid.items():
        (w, _), = adj[v]
        sign[v] = -sign[w]

    coords: List[Optional[Tuple[int, int, int]]] = []
    for kind, ident in vertex_kind:
        if kind == "face":
            f = grid.faces[ident]
            coords.append(tuple(E[f.edges[l]].height for l in range(3)))
        else:
            coords.append(None)

    slots = boundary_slots(grid)
    order = sorted(bnd_vid.values(), key=lambda v: (slots[vertex_kind[v][1]].side, slots[vertex_kind[v][1]].index))
    return StructureGraph(grid, colors, graph, ecolor, etype, chains, grid_to_chain,
                          vertex_kind, sign, coords, order, slots)


def sign_alternates(G: StructureGraph) -> bool:
    return all(G.sign[a] * G.sign[b] == -1 for a, b in G.graph.edges)


def propagate_types(G: StructureGraph) -> List[Optional[int]]:
    """Recover edge types from boundary edge types alone.

    Repeatedly uses that the three edges at a trivalent vertex have distinct
    types; returns the recovered list (``None`` where undetermined).
    """
    types: List[Optional[int]] = [None] * G.graph.n_edges
    adj = G.graph.adjacency()
    for v in G.boundary_order:
        (_, e), = adj[v]
        types[e] = G.edge_type[e]
    changed = True
    while changed:
        changed = False
        for v, nbrs in enumerate(adj):
            if len(nbrs) != 3:
                continue
            known = [types[e] for _, e in nbrs if types[e] is not None]
            if len(known) == 2:
                (missing,) = [e for _, e in nbrs if types[e] is None]
                types[missing] = ({0, 1, 2} - set(known)).pop()
                changed = True
    return types


# ---------------------------------------------------------------------------
# Divergence data and the cone
# ---------------------------------------------------------------------------


def _regular_check(x) -> AngleVector:
    x = _as_av(x)
    if not x.is_regular():
        raise NotRegular(f"boundary class {x} is not regular")
    return x


def boundary_heights(G: StructureGraph, alpha, beta, gamma) -> Dict[int, object]:
    """Heights of the G edges at univalent vertices, keyed by G edge id."""
    labels = hive_boundary_labels(G.grid, alpha, beta, gamma)
    out = {}
    for v in G.boundary_order:
        eid = G.vertex_kind[v][1]
        (_, e), = G.graph.adjacency()[v]
        out[e] = labels[eid]
    return out


def boundary_divergence(G: StructureGraph, alpha, beta, gamma, strict: bool = True) -> list:
    """Divergence ``phi``: ``s(v)`` at trivalent vertices and ``s(v) * L`` at
    univalent vertices (the flow leaving the boundary point).

    Raises :class:`NotSolvable` when ``sum(phi) != 0``, i.e. when
    ``|alpha| + |beta| - |gamma|`` differs from the grid's ``d``.
    """
    alpha, beta, gamma = (_regular_check(x) for x in (alpha, beta, gamma))
    labels = hive_boundary_labels(G.grid, alpha, beta, gamma)
    exact = alpha.exact and beta.exact and gamma.exact
    one = Fraction(1) if exact else 1.0
    phi = []
    for v, (kind, ident) in enumerate(G.vertex_kind):
        if kind == "face":
            phi.append(one * G.sign[v])
        else:
            phi.append(G.sign[v] * labels[ident])
    if strict and not check_solvable(G.graph, phi):
        raise NotSolvable(
            f"boundary sums give |alpha|+|beta|-|gamma| = {alpha.total() + beta.total() - gamma.total()}, grid has d={G.d}"
        )
    return phi


def divergence_batch(G: StructureGraph, alpha: np.ndarray, beta: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Float divergences for a batch of hive boundaries (rows sorted
    decreasingly); shape ``(batch, n_vertices)``.  No solvability check."""
    alpha, beta, gamma = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (alpha, beta, gamma))
    sides = (beta, alpha, 1.0 - gamma[:, ::-1])
    out = np.empty((len(alpha), G.graph.n_vertices))
    for v, (kind, ident) in enumerate(G.vertex_kind):
        if kind == "face":
            out[:, v] = G.sign[v]
        else:
            slot = G.slots[ident]
            value = sides[slot.side][:, slot.index - 1]
            out[:, v] = G.sign[v] * (value if slot.long else 1.0 - value)
    return out


@dataclass
class ConeSpec:
    """Strict affine inequalities ``sum(coef[e] * L_e) + const > 0``.

    Keys are G edge ids; each inequality comes from a lozenge of the hive
    grid whose middle edge is not colored ``m``: the higher of its two
    equal-type sides must carry the larger label.
    """

    rows: List[Tuple[Dict[int, int], int]] = field(default_factory=list)
    nonneg: List[Tuple[Dict[int, int], int]] = field(default_factory=list)
    empty: bool = False  # some inequality reads 0 > 0: the open cell is empty

    def __len__(self):
        return len(self.rows)


def _sub(a: Dict[int, int], b: Dict[int, int]) -> Tuple[Dict[int, int], int]:
    out = dict(a)
    for k, v in b.items():
        out[k] = out.get(k, 0) - v
    const = out.pop(-1, 0)
    return {k: v for k, v in out.items() if v != 0}, const


def cone_constraints(G: StructureGraph) -> ConeSpec:
    """Pull back the lozenge inequalities of the hive grid to ``G``.

    For a lozenge with middle edge of type ``k`` (not colored ``m``) joining
    an upward face ``u`` and a downward face ``w``, the honeycomb segment
    from ``u`` to ``w`` moves ``x_{k+1}`` by ``s(u)`` and ``x_{k+2}`` by
    ``-s(u)``.  Hence the type ``k+1`` side of ``w`` carries a larger label
    than the one of ``u`` (for ``s(u) = 1``), and the reverse for type
    ``k+2``.
    """
    forms = G.grid_label_forms()
    faces = G.grid.faces
    rows, seen = [], set()
    empty = False
    for lz in G.grid.lozenges:
        if G.colors[lz.middle] == M:
            continue
        k = G.grid.edges[lz.middle].type
        f1, f2 = (faces[i] for i in lz.faces)
        up, down = (f1, f2) if f1.up else (f2, f1)
        su = _face_sign(True)
        for l in ((k + 1) % 3, (k + 2) % 3):
            a, b = up.edges[l], down.edges[l]
            larger, smaller = (b, a) if (l == (k + 1) % 3) == (su > 0) else (a, b)
            coef, const = _sub(forms[larger], forms[smaller])
            if not coef:
                if const <= 0:
                    empty = True  # both sides in one chain: no strict order possible
                continue
            key = (tuple(sorted(coef.items())), const)
            if key in seen:
                continue
            seen.add(key)
            rows.append((coef, const))
    # boundary segments have positive length: the coordinate that vanishes
    # on the side they end on is positive at their trivalent endpoint
    adj = G.graph.adjacency()
    for v in G.boundary_order:
        side = G.slots[G.vertex_kind[v][1]].side
        (w, _), = adj[v]
        face = faces[G.vertex_kind[w][1]]
        coef, const = _sub(forms[face.edges[side]], {})
        key = (tuple(sorted(coef.items())), const)
        if key not in seen:
            seen.add(key)
            rows.append((coef, const))
    nonneg = []
    for eid, c in enumerate(G.colors):
        if c == M:  # labels of m edges must stay nonnegative as well
            coef, const = _sub(forms[eid], {})
            nonneg.append((coef, const))
    return ConeSpec(rows, nonneg, empty)


def cover_pairs(G: StructureGraph) -> List[Tuple[int, int]]:
    """Pairs ``(e, e')`` of G edges with a plain comparison ``L_e < L_e'``."""
    out = []
    for coef, const in cone_constraints(G).rows:
        if const == 0 and sorted(coef.values()) == [-1, 1]:
            lo = [k for k, v in coef.items() if v == -1][0]
            hi = [k for k, v in coef.items() if v == 1][0]
            out.append((lo, hi))
    return sorted(set(out))


# ---------------------------------------------------------------------------
# Heights of a flow, membership
# ---------------------------------------------------------------------------


def heights_from_flow(G: StructureGraph, omega: Sequence) -> list:
    """``L(e) = s(a) * omega(a, b)`` for the reference orientation ``(a, b)``."""
    return [G.sign[a] * omega[i] for i, (a, b) in enumerate(G.graph.edges)]


def flow_from_heights(G: StructureGraph, heights: Sequence) -> list:
    return [G.sign[a] * heights[i] for i, (a, b) in enumerate(G.graph.edges)]


def cone_values(G: StructureGraph, heights: Sequence, cone: Optional[ConeSpec] = None) -> Tuple[list, list]:
    cone = cone_constraints(G) if cone is None else cone
    vals = [sum(c * heights[k] for k, c in coef.items()) + const for coef, const in cone.rows]
    nn = [sum(c * heights[k] for k, c in coef.items()) + const for coef, const in cone.nonneg]
    return vals, nn


def in_cone(G: StructureGraph, heights: Sequence, cone: Optional[ConeSpec] = None, strict: bool = True) -> bool:
    cone = cone_constraints(G) if cone is None else cone
    vals, nn = cone_values(G, heights, cone)
    if strict:
        ok = not cone.empty and all(v > 0 for v in vals)
    else:
        ok = all(v >= 0 for v in vals)
    return ok and all(v >= 0 for v in nn) and all(0 <= h <= 1 for h in heights)


def membership(G: StructureGraph, phi: Sequence, S: Sequence[int], point: Sequence, cone: Optional[ConeSpec] = None) -> bool:
    """Solve for the flow with cotree heights ``point`` and test the cone.

    ``point`` gives heights (not signed flows) on the cotree edges ``S``.
    """
    from .flows import solve_flow

    if not check_solvable(G.graph, phi):
        raise NotSolvable("divergence does not sum to zero")
    vals = [G.sign[G.graph.edges[e][0]] * x for e, x in zip(S, point)]
    if any(not (0 <= x <= 1) for x in point):
        return False
    omega = solve_flow(G.graph, phi, S, vals)
    return in_cone(G, heights_from_flow(G, omega), cone, strict=True)


# ---------------------------------------------------------------------------
# Geometric realization
# ---------------------------------------------------------------------------


@dataclass
class Realization:
    points: List[Tuple]  # barycentric (x0, x1, x2) per vertex
    segments: List[Tuple[int, int]]  # vertex pairs, indexed like G edges
    colors: List[int]
    types: List[int]
    boundary: Tuple[tuple, tuple, tuple]  # classes read on sides 0, 1, 2


def _unit(l: int):
    """Barycentric direction of ``exp(2 pi i (l + 1) / 3)``: x_{l+1} decreases."""
    v = [0, 0, 0]
    v[(l + 1) % 3] = -1
    v[(l + 2) % 3] = 1
    return v


def realize(G: StructureGraph, heights: Sequence, check: bool = True) -> Realization:
    """Place the honeycomb in the triangle and (optionally) validate it."""
    pts: List[Tuple] = []
    adj = G.graph.adjacency()
    for v, (kind, ident) in enumerate(G.vertex_kind):
        if kind == "face":
            face = G.grid.faces[ident]
            pts.append(tuple(heights[G.grid_to_chain[face.edges[l]]] for l in range(3)))
        else:
            slot = G.slots[ident]
            (_, e), = adj[v]
            L = heights[e]
            l = G.edge_type[e]
            x = [None, None, None]
            x[slot.side] = 0 * L
            x[l] = L
            x[3 - slot.side - l] = 1 - L
            pts.append(tuple(x))
    sides: List[List] = [[], [], []]
    for v in G.boundary_order:
        slot = G.slots[G.vertex_kind[v][1]]
        sides[slot.side].append(pts[v][(slot.side + 1) % 3])
    real = Realization(pts, list(G.graph.edges), list(G.edge_color), list(G.edge_type),
                       tuple(tuple(sorted(s, reverse=True)) for s in sides))
    if check:
        validate_realization(G, real)
    return real


def _cross2(u, v):
    return u[0] * v[1] - u[1] * v[0]


def _planar(p):
    # barycentric -> plane with vertices 0, 1, exp(i pi/3)
    x1, x2 = p[1], p[2]
    return (x1 + x2 / 2, x2)  # second coordinate scaled by 2/sqrt(3): affine, keeps incidence


def validate_realization(G: StructureGraph, real: Realization, tol: float = 1e-12) -> None:
    """Raise :class:`GeometryViolation` unless the honeycomb is legal.

    Checks: every point in the triangle; every segment has positive length
    and leaves its trivalent endpoint ``v`` in direction
    ``-s(v) exp(2 pi i (l+1)/3)``; segment interiors meet only for a 0/1
    crossing at angle pi/3 measured from the 0 segment to the 1 segment.
    """
    pts = real.points
    for v, p in enumerate(pts):
        if any(c < -tol for c in p) or abs(sum(p) - 1) > tol:
            raise GeometryViolation(f"vertex {v} outside the triangle: {p}", offending=(v,))
    for e, (a, b) in enumerate(real.segments):
        l = real.types[e]
        for v, w in ((a, b), (b, a)):
            if G.graph.degree(v) != 3:
                continue
            step = pts[w][(l + 1) % 3] - pts[v][(l + 1) % 3]
            if abs(pts[w][l] - pts[v][l]) > tol:
                raise GeometryViolation(f"segment {e} is not of type {l}", offending=(e,))
            if not (G.sign[v] * step > tol):
                raise GeometryViolation(f"segment {e} leaves vertex {v} in the wrong direction", offending=(e,))
    P = [_planar(p) for p in pts]
    nseg = len(real.segments)
    for i in range(nseg):
        for j in range(i + 1, nseg):
            hit = _interior_intersection(P, real.segments[i], real.segments[j], tol)
            if hit is None:
                continue
            ci, cj = real.colors[i], real.colors[j]
            if {ci, cj} != {0, 1} or hit == "overlap":
                raise GeometryViolation(f"segments {i} and {j} cross illegally", offending=(i, j))
            zero, one = (i, j) if ci == 0 else (j, i)
            if not _pi_third(real.types[zero], real.types[one]):
                raise GeometryViolation(f"segments {zero} (0) and {one} (1) cross at 2pi/3", offending=(zero, one))


def _direction(l: int):
    ang = 2 * math.pi * (l + 1) / 3
    return (math.cos(ang), math.sin(ang))


def _pi_third(l0: int, l1: int) -> bool:
    """Angle from a type-``l0`` segment to a type-``l1`` segment equals pi/3."""
    u, w = _direction(l0), _direction(l1)
    if _cross2(u, w) < 0:
        u = (-u[0], -u[1])
    return abs(u[0] * w[0] + u[1] * w[1] - 0.5) < 1e-9


def _interior_intersection(P, s1, s2, tol):
    a, b = P[s1[0]], P[s1[1]]
    c, d = P[s2[0]], P[s2[1]]
    r = (b[0] - a[0], b[1] - a[1])
    s = (d[0] - c[0], d[1] - c[1])
    denom = _cross2(r, s)
    qp = (c[0] - a[0], c[1] - a[1])
    if abs(denom) <= tol:
        if abs(_cross2(qp, r)) > tol:
            return None  # parallel, disjoint lines
        rr = r[0] * r[0] + r[1] * r[1]
        if rr <= tol:
            return None
        t0 = (qp[0] * r[0] + qp[1] * r[1]) / rr
        t1 = t0 + (s[0] * r[0] + s[1] * r[1]) / rr
        lo, hi = min(t0, t1), max(t0, t1)
        if min(hi, 1) - max(lo, 0) > tol:
            return "overlap"
        return None
    t = _cross2(qp, s) / denom
    u = _cross2(qp, r) / denom
    if tol < t < 1 - tol and tol < u < 1 - tol:
        return "cross"
    return None


# ---------------------------------------------------------------------------
# SVG export
# ---------------------------------------------------------------------------

PALETTE = {0: "#d62728", 1: "#1f77b4", 3: "#000000", M: "#2ca02c"}


def _svg_xy(p, size, margin):
    x1, x2 = float(p[1]), float(p[2])
    X = x1 + x2 / 2
    Y = x2 * math.sqrt(3) / 2
    return (margin + X * size, margin + (math.sqrt(3) / 2 - Y) * size)


def honeycomb_svg(G: StructureGraph, real: Realization, size: int = 400, labels: bool = False) -> str:
    margin = 20
    W = size + 2 * margin
    H = int(size * math.sqrt(3) / 2) + 2 * margin
    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">']
    corners = [(1, 0, 0), (0, 1, 0), (0, 0, 1)]
    cs = " ".join("%.3f,%.3f" % _svg_xy(c, size, margin) for c in corners)
    out.append(f'<g id="frame"><polygon points="{cs}" fill="none" stroke="#888888" stroke-width="1"/></g>')
    out.append('<g id="segments">')
    for e, (a, b) in enumerate(real.segments):
        (x1, y1), (x2, y2) = _svg_xy(real.points[a], size, margin), _svg_xy(real.points[b], size, margin)
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                   f'stroke="{PALETTE[real.colors[e]]}" stroke-width="2" data-edge="{e}" data-type="{real.types[e]}"/>')
    out.append("</g>")
    if labels:
        out.append('<g id="labels" font-size="8">')
        for v, p in enumerate(real.points):
            x, y = _svg_xy(p, size, margin)
            txt = ",".join(_fmt(c) for c in p)
            out.append(f'<text x="{x:.3f}" y="{y:.3f}">{txt}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def hive_svg(grid: HiveGrid, colors: Sequence, labels: Optional[Dict[int, object]] = None, size: int = 400) -> str:
    margin = 20
    N = grid.side
    W = size + 2 * margin
    H = int(size * math.sqrt(3) / 2) + 2 * margin

    def xy(v):
        r, s = grid.rs[v]
        X = (r + s / 2) / N
        Y = s * math.sqrt(3) / 2 / N
        return (margin + X * size, margin + (math.sqrt(3) / 2 - Y) * size)

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{W}" height="{H}" viewBox="0 0 {W} {H}">', '<g id="edges">']
    for e in grid.edges:
        (x1, y1), (x2, y2) = xy(e.a), xy(e.b)
        out.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                   f'stroke="{PALETTE[colors[e.id]]}" stroke-width="2" data-edge="{e.id}" data-color="{colors[e.id]}"/>')
    out.append("</g>")
    if labels:
        out.append('<g id="labels" font-size="8">')
        for eid, val in sorted(labels.items()):
            e = grid.edges[eid]
            (x1, y1), (x2, y2) = xy(e.a), xy(e.b)
            out.append(f'<text x="{(x1 + x2) / 2:.3f}" y="{(y1 + y2) / 2:.3f}">{_fmt(val)}</text>')
        out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _fmt(x) -> str:
    if isinstance(x, Fraction):
        return f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator)
    return f"{float(x):.4g}"


def honeycomb_in_cell(G: StructureGraph, alpha, beta, gamma) -> Optional[Realization]:
    """The honeycomb at the Chebyshev center of ``G``'s cell for the given
    boundary, or ``None`` when the cell is empty."""
    from .volumes import cell_system, interior_point

    system = cell_system(G)
    if system.empty:
        return None
    try:
        phi = boundary_divergence(G, alpha, beta, gamma)
    except NotSolvable:
        return None
    y, r = interior_point(system.polytope(phi))
    if y is None:
        return None
    return realize(G, system.heights(phi, y))


# ---------------------------------------------------------------------------
# Cached enumeration
# ---------------------------------------------------------------------------

_GRAPH_CACHE: Dict[Tuple[int, int], List[StructureGraph]] = {}


def structure_graphs(n: int, d: int) -> List[StructureGraph]:
    """Reduced graphs of every color map of the ``(n, d)`` grid (cached)."""
    from .hivegrid import build_grid, enumerate_color_maps

    key = (n, d)
    if key not in _GRAPH_CACHE:
        grid = build_grid(n, d)
        _GRAPH_CACHE[key] = [reduce(grid, cm) for cm in enumerate_color_maps(grid)]
    return _GRAPH_CACHE[key]


def triangle_volume_batch(n: int, X0: np.ndarray, X1: np.ndarray, X2: np.ndarray,
                          rng: Optional[np.random.Generator] = None) -> np.ndarray:
    """Sum of cell volumes over all reduced graphs, per row of side classes.

    Rows whose class sums are not ``n + d`` for an integer ``0 <= d <= n``
    give 0.  Dimensions 0 and 1 are evaluated exactly; higher dimensions by
    one uniform point per row and cell (an unbiased hit indicator), which
    needs ``rng``.
    """
    from .volumes import cell_system

    X0, X1, X2 = (np.atleast_2d(np.asarray(x, dtype=float)) for x in (X0, X1, X2))
    tot = X0.sum(1) + X1.sum(1) + X2.sum(1) - n
    d = np.rint(tot).astype(int)
    good = np.abs(tot - d) < 1e-9
    gamma = 1.0 - X2[:, ::-1]
    out = np.zeros(len(X0))
    for dd in range(n + 1):
        mask = good & (d == dd)
        if not mask.any():
            continue
        for G in structure_graphs(n, dd):
            system = cell_system(G)
            if system.empty:
                continue
            Phi = divergence_batch(G, X1[mask], X0[mask], gamma[mask])
            if system.dimension <= 1:
                out[mask] += system.lengths_batch(Phi)
            else:
                if rng is None:
                    raise ValueError("dimension > 1 needs an rng for the hit estimator")
                Y = rng.random((int(mask.sum()), system.dimension))
                out[mask] += system.inside_batch(Phi, Y)
    return out
