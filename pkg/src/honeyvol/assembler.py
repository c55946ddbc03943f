"""Surfaces glued from triangles, composite structure graphs, and Z values.

A surface of genus ``g`` with ``p`` boundary circles is cut into ``N = p +
2g - 2`` pairs of pants, each drawn as a triangle; a *slot* ``(i, j)`` is
side ``j`` of triangle ``i``.  Glued slots carry a class ``u`` on the first
slot and ``tilde(u)`` on the second; free slots carry the boundary classes.

Flat-connection volumes::

    Z_{g,p}(alpha_1..alpha_p) = c03^N / (n^{2g+p-3} prod Delta(alpha_j))
                                * sum over composite graphs of Vol

where ``Vol`` is the cotree-projected volume of the composite cell.  The
same number is also computed by nested integrals over the glued classes
(``z_gp_iterated``).
"""

from __future__ import annotations

import itertools
import json
import math
import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from .classes import AngleVector, standardize, tilde, vandermonde, vandermonde_batch
from .errors import InvalidTopology, NotRegular, NotSolvable
from .flows import FlowGraph, check_solvable, disjoint_union, sieve
from .honeycombs import (StructureGraph, cone_constraints, side_boundary_labels, structure_graphs,
                         triangle_volume_batch)
from .volumes import K_MAX, CellSystem, VolumeEstimate, combine, system_volume

Slot = Tuple[int, int]

#: Order in which the free sides of a triangle receive boundary classes, so
#: that the one-triangle surface reads ``(alpha, beta, gamma)`` as in ``z03``.
FREE_SIDE_ORDER = (1, 0, 2)


# ---------------------------------------------------------------------------
# Surfaces
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SurfaceSpec:
    g: int
    p: int
    N: int
    gluings: Tuple[Tuple[Slot, Slot], ...]
    free: Tuple[Slot, ...]

    def validate(self) -> "SurfaceSpec":
        g, p, N = self.g, self.p, self.N
        if g < 0 or p < 0 or N != p + 2 * g - 2 or N < 1:
            raise InvalidTopology(f"need N = p + 2g - 2 >= 1, got g={g}, p={p}, N={N}")
        slots = [s for pair in self.gluings for s in pair] + list(self.free)
        for i, j in slots:
            if not (0 <= i < N and j in (0, 1, 2)):
                raise InvalidTopology(f"slot {(i, j)} out of range")
        if len(set(slots)) != len(slots):
            raise InvalidTopology("a slot is used twice")
        if len(slots) != 3 * N:
            raise InvalidTopology(f"{len(slots)} slots used, surface has {3 * N}")
        if len(self.free) != p:
            raise InvalidTopology(f"{len(self.free)} free slots for p={p}")
        if 2 * len(self.gluings) != 3 * N - p:
            raise InvalidTopology("gluing count must be (3N - p)/2")
        parent = list(range(N))

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for (i, _), (k, _) in self.gluings:
            parent[find(i)] = find(k)
        if len({find(i) for i in range(N)}) != 1:
            raise InvalidTopology("triangles do not form a connected surface")
        # Euler characteristic: N pants, gluing along circles keeps chi = -N
        return self

    def to_json(self, n: Optional[int] = None, boundaries=None) -> str:
        data = {"g": self.g, "p": self.p, "triangles": self.N,
                "gluings": [[list(a), list(b)] for a, b in self.gluings],
                "free": [list(s) for s in self.free]}
        if n is not None:
            data["n"] = n
        if boundaries is not None:
            data["boundaries"] = [str(b) for b in boundaries]
        return json.dumps(data, indent=1, sort_keys=True)


def spec_from_json(text: str) -> Tuple[SurfaceSpec, dict]:
    """Parse a surface file; returns the spec and the raw dict."""
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ValueError(f"line {exc.lineno}: {exc.msg}") from exc
    g, p = int(data["g"]), int(data["p"])
    if "gluings" in data and "free" in data:
        N = int(data.get("triangles", p + 2 * g - 2))
        glu = tuple((tuple(a), tuple(b)) for a, b in data["gluings"])
        free = tuple(tuple(s) for s in data["free"])
        spec = SurfaceSpec(g, p, N, glu, free).validate()
    else:
        hint = tuple(data["hint"]) if "hint" in data else None
        spec = pants_surface(g, p, hint)
    return spec, data


def pants_surface(g: int, p: int, hint: Optional[Tuple[int, int]] = None, gluings=None, free=None) -> SurfaceSpec:
    """Caterpillar decomposition: triangle ``i`` glued to ``i + 1``.

    ``hint = (j, j')`` glues side ``j`` of triangle ``i`` to side ``j'`` of
    triangle ``i + 1`` (default ``(2, 1)``).  Handles are made by gluing the
    last ``2g`` free slots in pairs.  An explicit ``gluings``/``free`` pair
    overrides everything.
    """
    N = p + 2 * g - 2
    if N < 1 or g < 0 or p < 0:
        raise InvalidTopology(f"p + 2g - 2 must be >= 1 (g={g}, p={p})")
    if gluings is not None:
        return SurfaceSpec(g, p, N, tuple(gluings), tuple(free)).validate()
    j1, j2 = hint if hint is not None else (2, 1)
    if j1 not in (0, 1, 2) or j2 not in (0, 1, 2):
        raise InvalidTopology(f"bad hint {hint}")
    glu = [((i, j1), (i + 1, j2)) for i in range(N - 1)]
    used = {s for pair in glu for s in pair}
    open_slots = [(i, j) for i in range(N) for j in FREE_SIDE_ORDER if (i, j) not in used]
    handles = open_slots[len(open_slots) - 2 * g:] if g else []
    for k in range(g):
        glu.append((handles[2 * k], handles[2 * k + 1]))
    free_slots = open_slots[: len(open_slots) - 2 * g]
    return SurfaceSpec(g, p, N, tuple(glu), tuple(free_slots)).validate()


def total_d(spec: SurfaceSpec, n: int, boundaries: Sequence) -> Fraction:
    """``sum_i d_i`` over triangles, forced by the boundary classes:
    ``sum |alpha_j| + (g - 1) n`` (each gluing contributes ``|u| + |tilde u| = n``)."""
    tot = sum((AngleVector(tuple(b)).total() if not isinstance(b, AngleVector) else b.total()) for b in boundaries)
    return tot + (spec.g - 1) * n


# ---------------------------------------------------------------------------
# Composite graphs
# ---------------------------------------------------------------------------


@dataclass
class CompositeGraph:
    spec: SurfaceSpec
    n: int
    ds: Tuple[int, ...]
    parts: Tuple[StructureGraph, ...]
    graph: FlowGraph
    edge_sign: List[int]
    vertex_origin: List[Tuple[int, int]]  # (triangle, local vertex), W side for glued ones
    glued: Dict[int, Tuple[Tuple[int, int], Tuple[int, int]]]  # new vertex -> both origins
    rows: list
    nonneg: list
    empty: bool
    _system: Optional[CellSystem] = None

    @property
    def color_number(self) -> int:
        return sum(G.color_number for G in self.parts)

    @property
    def dimension(self) -> int:
        return self.graph.n_edges - self.graph.n_vertices + 1

    def system(self) -> CellSystem:
        if self._system is None:
            self._system = CellSystem(self.graph, self.edge_sign, self.rows, self.nonneg, empty=self.empty)
        return self._system


def expected_counts(spec: SurfaceSpec, n: int) -> Tuple[int, int, int]:
    """``(edges, vertices by construction, vertices by the closed formula)``.

    Sieving merges ``n`` pairs per gluing, so the construction gives
    ``N (n^2 + 3n) - n * #gluings`` vertices; the closed formula
    ``N n^2 + (3N - (p + 2g)) n / 2`` is reported alongside.
    """
    N = spec.N
    ne = 3 * N * n * (n + 1) // 2
    nv_built = N * (n * n + 3 * n) - n * len(spec.gluings)
    nv_formula = N * n * n + (3 * N - (spec.p + 2 * spec.g)) * n // 2
    return ne, nv_built, nv_formula


def _slot_vertices(G: StructureGraph, side: int) -> List[int]:
    """Univalent vertices on a side, by class index 1..n."""
    out = [v for v in G.boundary_order if G.slots[G.vertex_kind[v][1]].side == side]
    return sorted(out, key=lambda v: G.slots[G.vertex_kind[v][1]].index)


def build_composite(spec: SurfaceSpec, n: int, parts: Sequence[StructureGraph]) -> CompositeGraph:
    graphs = [G.graph for G in parts]
    union, offsets = disjoint_union(graphs)
    W, W2 = [], []
    for (i, j), (k, l) in spec.gluings:
        a = [offsets[i] + v for v in _slot_vertices(parts[i], j)]
        b = [offsets[k] + v for v in _slot_vertices(parts[k], l)]
        W += a
        W2 += list(reversed(b))  # j-th vertex meets the (n + 1 - j)-th
    graph, vmap, emap = sieve(union, W, W2)
    origin: List[Optional[Tuple[int, int]]] = [None] * graph.n_vertices
    tri_of = []
    for t, G in enumerate(parts):
        tri_of += [(t, v) for v in range(G.graph.n_vertices)]
    for old, new in enumerate(vmap):
        if origin[new] is None:
            origin[new] = tri_of[old]
    glued = {}
    for w, w2 in zip(W, W2):
        glued[vmap[w]] = (tri_of[w], tri_of[w2])
    edge_sign, e_off = [], []
    off = 0
    for t, G in enumerate(parts):
        e_off.append(off)
        for (a, b) in G.graph.edges:
            sig = G.sign[a]
            na, nb = vmap[offsets[t] + a], vmap[offsets[t] + b]
            edge_sign.append(sig if na < nb else -sig)
        off += G.graph.n_edges
    rows, nonneg, empty = [], [], False
    for t, G in enumerate(parts):
        cone = cone_constraints(G)
        empty = empty or cone.empty
        sh = e_off[t]
        rows += [({e + sh: c for e, c in coef.items()}, const) for coef, const in cone.rows]
        nonneg += [({e + sh: c for e, c in coef.items()}, const) for coef, const in cone.nonneg]
    # glued classes must be weakly decreasing: u_t >= u_{t+1}
    for (i, j), _ in spec.gluings:
        G = parts[i]
        forms = []
        for v in _slot_vertices(G, j):
            (_, e), = G.graph.adjacency()[v]
            slot = G.slots[G.vertex_kind[v][1]]
            e += e_off[i]
            forms.append(({e: 1}, 0) if slot.long else ({e: -1}, 1))
        for (c1, k1), (c2, k2) in zip(forms, forms[1:]):
            coef = dict(c1)
            for e, c in c2.items():
                coef[e] = coef.get(e, 0) - c
            nonneg.append(({e: c for e, c in coef.items() if c}, k1 - k2))
    cg = CompositeGraph(spec, n, tuple(G.d for G in parts), tuple(parts), graph, edge_sign, origin, glued,
                        rows, nonneg, empty)
    ne, nv, _ = expected_counts(spec, n)
    if graph.n_edges != ne or graph.n_vertices != nv:
        raise AssertionError(f"composite graph has {graph.n_edges} edges / {graph.n_vertices} vertices, "
                             f"construction count n_e={ne}, n_v={nv}")
    return cg


#: Size of the generic shift applied to classes glued within one triangle.
SELF_GLUE_SHIFT = 1e-9


def self_glue_shift(n: int, exact: bool = False) -> list:
    """Zero-sum shift with no zero entry, added to the second copy of a class
    glued to another side of the same triangle.

    On such gluings the two copies are exactly complementary, which places
    differently colored lines on a common line; two reduced graphs then
    describe the same honeycombs and their cells coincide.  Evaluating a
    generic nearby point selects the continuous extension.
    """
    raw = [((k + 1) * 0.6180339887498949) % 1.0 for k in range(n)]
    mean = sum(raw) / n
    w = [r - mean for r in raw]
    if n == 1:
        return [0.0]
    if exact:
        return [Fraction(round(x * 1000), 1000) * Fraction(1, 10 ** 9) for x in w[:-1]] + \
               [-sum(Fraction(round(x * 1000), 1000) for x in w[:-1]) * Fraction(1, 10 ** 9)]
    return [SELF_GLUE_SHIFT * x for x in w]


def _self_glued(spec: SurfaceSpec, a: Slot, b: Slot) -> bool:
    return a[0] == b[0]


def boundary_divergence_gp(cg: CompositeGraph, boundaries: Sequence, strict: bool = True) -> list:
    """``s(v)`` at trivalent vertices, ``c + c' - 1`` at glued vertices and
    ``s(v) * label`` at free univalent vertices."""
    spec = cg.spec
    bnds = [b if isinstance(b, AngleVector) else AngleVector(tuple(b)) for b in boundaries]
    if len(bnds) != spec.p:
        raise InvalidTopology(f"{len(bnds)} boundary classes for p={spec.p}")
    for b in bnds:
        if not b.is_regular():
            raise NotRegular(f"boundary class {b} is not regular")
    exact = all(b.exact for b in bnds)
    one = Fraction(1) if exact else 1.0
    free_class = {slot: b for slot, b in zip(spec.free, bnds)}
    shift = self_glue_shift(cg.n, exact)
    labels = []
    for t, G in enumerate(cg.parts):
        sides = [free_class.get((t, j), [0] * cg.n) for j in range(3)]
        labels.append(side_boundary_labels(G.grid, sides))
    phi = []
    for v in range(cg.graph.n_vertices):
        if v in cg.glued:
            cs = []
            for (t, lv) in cg.glued[v]:
                G = cg.parts[t]
                (_, e), = G.graph.adjacency()[lv]
                cs.append(G.edge_color[e])
            val = one * (cs[0] + cs[1] - 1)
            (ta, _), (tb, lvb) = cg.glued[v]
            if ta == tb:
                Gb = cg.parts[tb]
                idx = Gb.slots[Gb.vertex_kind[lvb][1]].index
                val = val - shift[idx - 1]
            phi.append(val)
            continue
        t, lv = cg.vertex_origin[v]
        G = cg.parts[t]
        kind, ident = G.vertex_kind[lv]
        if kind == "face":
            phi.append(one * G.sign[lv])
        else:
            phi.append(G.sign[lv] * labels[t][ident])
    if strict and not check_solvable(cg.graph, phi):
        raise NotSolvable("boundary classes do not match the composite graph's color numbers")
    return phi


def _lp_feasible(system: CellSystem, phi) -> bool:
    """Positive-radius ball inside the closed polytope (float LP)."""
    b = system.rhs_batch(np.array([[float(x) for x in phi]]))[:, 0]
    A = system._Af
    k = A.shape[1]
    if k == 0:
        return bool(np.all(b >= -1e-12))
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(k + 1)
    c[-1] = -1
    res = linprog(c, A_ub=np.hstack([A, norms[:, None]]), b_ub=b, bounds=[(None, None)] * k + [(0, 1)],
                  method="highs")
    return res.status == 0 and res.x[-1] > 1e-10


def d_splits(spec: SurfaceSpec, n: int, d: int) -> List[Tuple[int, ...]]:
    return [ds for ds in itertools.product(range(n + 1), repeat=spec.N) if sum(ds) == d]


def composite_graphs(spec: SurfaceSpec, n: int, boundaries: Sequence, prefilter: bool = True) -> List[CompositeGraph]:
    """Feasible composite graphs for the given boundary classes."""
    bnds = [b if isinstance(b, AngleVector) else AngleVector(tuple(b)) for b in boundaries]
    dtot = total_d(spec, n, bnds)
    if isinstance(dtot, Fraction) and dtot.denominator != 1:
        return []
    if not isinstance(dtot, Fraction):
        if abs(dtot - round(dtot)) > 1e-9:
            return []
    d = int(round(dtot))
    out = []
    for ds in d_splits(spec, n, d):
        for parts in itertools.product(*[structure_graphs(n, di) for di in ds]):
            cg = build_composite(spec, n, parts)
            if cg.empty:
                continue
            try:
                phi = boundary_divergence_gp(cg, bnds)
            except NotSolvable:
                continue
            if prefilter and not _lp_feasible(cg.system(), phi):
                continue
            out.append(cg)
    return out


# ---------------------------------------------------------------------------
# Constants
# ---------------------------------------------------------------------------


def c03_default(n: int) -> float:
    """``2^{(n+1) mod 2} (2 pi)^{(n-1)(n-2)} / n!`` (the parity reading of the exponent)."""
    return 2.0 ** ((n + 1) % 2) * (2 * math.pi) ** ((n - 1) * (n - 2)) / math.factorial(n)


def calibration_path() -> Optional[str]:
    return os.environ.get("HONEYVOL_CALIBRATION")


def load_calibration(path: Optional[str] = None) -> dict:
    path = path or calibration_path()
    if not path or not os.path.exists(path):
        return {}
    with open(path) as fh:
        return json.load(fh)


def save_calibration(n: int, value: float, path: Optional[str] = None, key: Optional[str] = None) -> dict:
    path = path or calibration_path()
    if not path:
        raise ValueError("no calibration path (set HONEYVOL_CALIBRATION)")
    data = load_calibration(path)
    data[key or f"n={n}"] = float(value)
    with open(path, "w") as fh:
        json.dump(data, fh, indent=1, sort_keys=True)
    return data


def c03(n: int, calibrated: bool = True, path: Optional[str] = None) -> float:
    """The triangle constant: the stored calibration for ``n`` if any, else the default."""
    if calibrated:
        data = load_calibration(path)
        if f"n={n}" in data:
            return float(data[f"n={n}"])
    return c03_default(n)


def prefactor(spec: SurfaceSpec, n: int, boundaries: Sequence, constant: Optional[float] = None) -> float:
    c = c03(n) if constant is None else constant
    den = n ** (2 * spec.g + spec.p - 3) * np.prod([vandermonde(b) for b in boundaries])
    return c ** spec.N / den


# ---------------------------------------------------------------------------
# Z values
# ---------------------------------------------------------------------------


def _av(x) -> AngleVector:
    return x if isinstance(x, AngleVector) else standardize(x)


def z03(alpha, beta, gamma, method: str = "auto", samples: int = 100_000, seed: int = 0,
        constant: Optional[float] = None, jobs: int = 1) -> VolumeEstimate:
    """``Z_{0,3}``: the one-triangle surface with classes ``alpha, beta, gamma``."""
    spec = pants_surface(0, 3)
    return z_gp(spec, [alpha, beta, gamma], method=method, samples=samples, seed=seed, constant=constant, jobs=jobs)


def volume_sum(spec: SurfaceSpec, boundaries: Sequence, method: str = "auto", samples: int = 100_000,
               seed: int = 0, k_max: int = K_MAX, jobs: int = 1) -> Tuple[VolumeEstimate, list]:
    """Sum of composite-cell volumes and the per-graph breakdown."""
    bnds = [_av(b) for b in boundaries]
    n = bnds[0].n
    rows = []
    parts = []
    for idx, cg in enumerate(composite_graphs(spec, n, bnds)):
        phi = boundary_divergence_gp(cg, bnds)
        est = system_volume(cg.system(), phi, method=method, samples=samples, seed=seed + idx, k_max=k_max,
                            jobs=jobs)
        parts.append(est)
        rows.append({"graph": idx, "ds": list(cg.ds), "dimension": cg.dimension, "method": est.method,
                     "value": est.value, "stderr": est.stderr})
    return combine(parts), rows


def z_gp(spec: SurfaceSpec, boundaries: Sequence, method: str = "auto", samples: int = 100_000, seed: int = 0,
         constant: Optional[float] = None, k_max: int = K_MAX, jobs: int = 1, breakdown: bool = False):
    """Direct evaluation: one polytope volume per composite graph."""
    bnds = [_av(b) for b in boundaries]
    n = bnds[0].n
    dtot = total_d(spec, n, bnds)
    if abs(float(dtot) - round(float(dtot))) > 1e-9:
        raise NotSolvable(f"sum of boundary angles gives non-integral d = {dtot}")
    if method == "iterated":
        est = z_gp_iterated(spec, bnds, samples=samples, seed=seed, constant=constant)
        return (est, []) if breakdown else est
    total, rows = volume_sum(spec, bnds, method, samples, seed, k_max, jobs)
    pre = prefactor(spec, n, bnds, constant)
    est = total.scaled(pre)
    est = VolumeEstimate(float(est.value), est.stderr, total.method, total.samples, seed, total.flags)
    return (est, rows) if breakdown else est


def _glue_order(spec: SurfaceSpec):
    """Split gluings into a spanning tree of the triangle adjacency (rooted at
    triangle 0, listed children-first) and the remaining loop gluings."""
    N = spec.N
    adj: Dict[int, list] = {i: [] for i in range(N)}
    for g_idx, ((i, _), (k, _)) in enumerate(spec.gluings):
        adj[i].append((k, g_idx))
        adj[k].append((i, g_idx))
    seen = {0}
    order, parent_glue = [0], {}
    stack = [0]
    while stack:
        t = stack.pop()
        for k, g_idx in sorted(adj[t]):
            if k not in seen:
                seen.add(k)
                parent_glue[k] = g_idx
                order.append(k)
                stack.append(k)
    tree = set(parent_glue.values())
    loops = [g for g in range(len(spec.gluings)) if g not in tree]
    return order, parent_glue, loops


def z_gp_iterated(spec: SurfaceSpec, boundaries: Sequence, samples: int = 100_000, seed: int = 0,
                  constant: Optional[float] = None) -> VolumeEstimate:
    """Nested-integral evaluation over the glued classes.

    Loop gluings (contractions) integrate ``u`` over all regular classes;
    tree gluings integrate over the slice of fixed ``|u| mod 1`` forced by
    the free classes beyond them (gluing formula).  Each glued class is drawn
    uniformly with weight ``1/n!``; every triangle contributes its summed
    cell volume at the resulting side classes.
    """
    bnds = [_av(b) for b in boundaries]
    n = bnds[0].n
    rng = np.random.default_rng(np.random.SeedSequence(seed))
    M = samples
    vals = volume_sum_batch(spec, n, [np.tile(b.as_array(), (M, 1)) for b in bnds], rng)
    mean = float(vals.mean())
    err = float(vals.std(ddof=1) / math.sqrt(M)) if M > 1 else 0.0
    pre = prefactor(spec, n, bnds, constant)
    return VolumeEstimate(mean * pre, err * pre, "iterated", M, seed)


def prefactor_batch(spec: SurfaceSpec, n: int, boundaries: Sequence[np.ndarray], constant: Optional[float] = None):
    """Row-wise :func:`prefactor` for boundary classes given as ``(M, n)`` arrays."""
    c = c03(n) if constant is None else constant
    den = float(n) ** (2 * spec.g + spec.p - 3)
    out = np.full(len(boundaries[0]), c ** spec.N / den)
    for b in boundaries:
        out = out / vandermonde_batch(b)
    return out


def volume_sum_batch(spec: SurfaceSpec, n: int, boundaries: Sequence[np.ndarray],
                     rng: np.random.Generator) -> np.ndarray:
    """Unbiased per-row estimates of the composite volume sum.

    Row ``i`` uses the free classes ``boundaries[j][i]``; glued classes are
    drawn as in :func:`z_gp_iterated`.  Rows whose classes violate the
    integrality condition estimate zero.
    """
    M = len(boundaries[0])
    order, parent_glue, loops = _glue_order(spec)
    U: Dict[int, np.ndarray] = {}
    weight = 1.0
    for g_idx in loops:
        u = -np.sort(-rng.random((M, n)), axis=1)
        U[g_idx] = u
        weight /= math.factorial(n)
    side_class: Dict[Slot, np.ndarray] = {}
    for slot, b in zip(spec.free, boundaries):
        side_class[slot] = np.asarray(b, dtype=float)

    shift = np.array(self_glue_shift(n))

    def assign(g_idx):
        a, b = spec.gluings[g_idx]
        u = U[g_idx]
        side_class[a] = u
        side_class[b] = 1.0 - u[:, ::-1]
        if _self_glued(spec, a, b):
            side_class[b] = side_class[b] + shift

    for g_idx in loops:
        assign(g_idx)
    children: Dict[int, list] = {i: [] for i in range(spec.N)}
    for child, g_idx in parent_glue.items():
        (i, _), (k, _) = spec.gluings[g_idx]
        children[i if k == child else k].append(child)

    def subtree(t):
        out = [t]
        for c in children[t]:
            out += subtree(c)
        return out

    for child in reversed(order[1:]):
        g_idx = parent_glue[child]
        tri = set(subtree(child))
        # residue of the class on the child's side of this gluing
        r = np.zeros(M)
        for slot, arr in side_class.items():
            if slot[0] in tri:
                r += arr.sum(axis=1)
        r = np.mod(-r, 1.0)
        a, b = spec.gluings[g_idx]
        res = r if a[0] == child else np.mod(-r, 1.0)
        U[g_idx] = _slice_batch(res, n, rng)
        weight /= math.factorial(n)
        assign(g_idx)
    vals = np.ones(M)
    for t in range(spec.N):
        X = [side_class[(t, j)] for j in range(3)]
        vals *= triangle_volume_batch(n, X[0], X[1], X[2], rng=rng)
        if not vals.any():
            break
    return vals * weight


def _slice_batch(residues: np.ndarray, n: int, rng: np.random.Generator) -> np.ndarray:
    """One uniform point of the slice ``|u| = r mod 1`` per residue."""
    free = rng.random((len(residues), n - 1))
    last = np.mod(residues - free.sum(axis=1), 1.0)
    u = np.concatenate([free, last[:, None]], axis=1)
    return -np.sort(-u, axis=1)
