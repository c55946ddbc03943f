"""Flows on finite graphs with prescribed divergence.

A flow stores one scalar per edge, read along the edge's reference orientation
(smaller vertex id towards larger vertex id); the reversed orientation carries
the negated value.  The divergence of a flow at ``v`` is the sum of the flow
leaving ``v`` along every incident edge.

Everything here is generic in the scalar type: Python ints, Fractions, floats
and numpy vectors (used to carry linear forms symbolically) all work, because
the algorithms only add and subtract.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from .errors import Disconnected, NotCotree, NotSolvable, NotUnivalent, Overlap


@dataclass
class FlowGraph:
    """Undirected multigraph without self-loops.

    ``edges[i] = (a, b)`` with ``a < b`` fixes the reference orientation of
    edge ``i``.  ``payload`` holds optional per-edge data (color, type, ...).
    """

    n_vertices: int
    edges: List[Tuple[int, int]]
    payload: List[object] = field(default_factory=list)

    def __post_init__(self):
        norm = []
        for a, b in self.edges:
            a, b = int(a), int(b)
            if a == b:
                raise ValueError(f"self-loop at vertex {a}")
            if not (0 <= a < self.n_vertices and 0 <= b < self.n_vertices):
                raise ValueError(f"edge ({a}, {b}) out of range")
            norm.append((a, b) if a < b else (b, a))
        self.edges = norm
        if not self.payload:
            self.payload = [None] * len(norm)
        if len(self.payload) != len(norm):
            raise ValueError("payload length differs from edge count")
        self._adj = None

    @property
    def n_edges(self) -> int:
        return len(self.edges)

    def adjacency(self) -> List[List[Tuple[int, int]]]:
        """``adj[v]`` = sorted list of ``(neighbour, edge id)``."""
        if self._adj is None:
            adj: List[List[Tuple[int, int]]] = [[] for _ in range(self.n_vertices)]
            for i, (a, b) in enumerate(self.edges):
                adj[a].append((b, i))
                adj[b].append((a, i))
            for lst in adj:
                lst.sort()
            self._adj = adj
        return self._adj

    def degree(self, v: int) -> int:
        return len(self.adjacency()[v])

    def degrees(self) -> List[int]:
        return [len(a) for a in self.adjacency()]

    def boundary_vertices(self) -> List[int]:
        return [v for v, d in enumerate(self.degrees()) if d == 1]

    def components(self) -> List[List[int]]:
        adj = self.adjacency()
        seen = [False] * self.n_vertices
        comps = []
        for s in range(self.n_vertices):
            if seen[s]:
                continue
            seen[s] = True
            comp, queue = [], deque([s])
            while queue:
                v = queue.popleft()
                comp.append(v)
                for w, _ in adj[v]:
                    if not seen[w]:
                        seen[w] = True
                        queue.append(w)
            comps.append(sorted(comp))
        return comps

    def is_connected(self) -> bool:
        return self.n_vertices > 0 and len(self.components()) == 1

    def flow_dimension(self) -> int:
        """``|E| - |V| + (number of components)``."""
        return self.n_edges - self.n_vertices + len(self.components())


def orient(g: FlowGraph, omega: Sequence, v: int, e: int):
    """Value of the flow on edge ``e`` read as leaving vertex ``v``."""
    a, b = g.edges[e]
    if v == a:
        return omega[e]
    if v == b:
        return -omega[e]
    raise ValueError(f"vertex {v} is not an endpoint of edge {e}")


def divergence(g: FlowGraph, omega: Sequence) -> list:
    """``div(omega)(v) = sum over incident edges of omega(v, x)``."""
    if len(omega) != g.n_edges:
        raise ValueError("flow length differs from edge count")
    zero = omega[0] * 0 if len(omega) else 0
    out = [zero for _ in range(g.n_vertices)]
    for i, (a, b) in enumerate(g.edges):
        out[a] = out[a] + omega[i]
        out[b] = out[b] - omega[i]
    return out


def _is_zero(x) -> bool:
    if isinstance(x, float):
        return abs(x) < 1e-9
    return x == 0


def check_solvable(g: FlowGraph, phi: Sequence) -> bool:
    """True iff ``phi`` sums to zero on every connected component."""
    if len(phi) != g.n_vertices:
        raise ValueError("divergence length differs from vertex count")
    for comp in g.components():
        total = sum((phi[v] for v in comp), phi[comp[0]] * 0)
        if not _is_zero(total):
            return False
    return True


def find_spanning_tree(g: FlowGraph) -> List[int]:
    """Breadth-first spanning tree from vertex 0, neighbours in sorted order.

    Returns the sorted list of tree edge ids.
    """
    if g.n_vertices == 0:
        return []
    adj = g.adjacency()
    seen = [False] * g.n_vertices
    seen[0] = True
    tree = []
    queue = deque([0])
    while queue:
        v = queue.popleft()
        for w, e in adj[v]:
            if not seen[w]:
                seen[w] = True
                tree.append(e)
                queue.append(w)
    if not all(seen):
        raise Disconnected("graph is not connected")
    return sorted(tree)


def cotree(g: FlowGraph, tree: Optional[Iterable[int]] = None) -> List[int]:
    """Complement of a spanning tree (the lexicographic BFS tree by default)."""
    t = set(find_spanning_tree(g) if tree is None else tree)
    return [e for e in range(g.n_edges) if e not in t]


def _check_cotree(g: FlowGraph, S: Sequence[int]) -> List[int]:
    S = sorted(set(int(e) for e in S))
    tree = [e for e in range(g.n_edges) if e not in set(S)]
    if len(tree) != g.n_vertices - 1:
        raise NotCotree(f"complement has {len(tree)} edges, expected {g.n_vertices - 1}")
    # union-find acyclicity test
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for e in tree:
        a, b = g.edges[e]
        ra, rb = find(a), find(b)
        if ra == rb:
            raise NotCotree("complement of S contains a cycle")
        parent[ra] = rb
    return tree


def solve_flow(g: FlowGraph, phi: Sequence, S: Sequence[int], values: Sequence):
    """The unique flow with divergence ``phi`` taking ``values`` on ``S``.

    Leaf peeling on the spanning tree ``E \\ S``: a leaf's tree edge carries
    whatever divergence is still unaccounted for at the leaf.  Only additions
    and subtractions are performed, so integer data gives integer flows.
    """
    return _peel(g, phi, S, values, check=True)


def _peel(g, phi, S, values, check):
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    S = list(S)
    if len(values) != len(S):
        raise ValueError("one value per cotree edge required")
    tree = _check_cotree(g, S)
    if len(phi) != g.n_vertices:
        raise ValueError("divergence length differs from vertex count")

    zero = phi[0] * 0
    omega: list = [None] * g.n_edges
    residual = list(phi)
    for e, x in zip(S, values):
        omega[e] = x
        a, b = g.edges[e]
        residual[a] = residual[a] - x
        residual[b] = residual[b] + x

    tree_adj: Dict[int, List[int]] = {v: [] for v in range(g.n_vertices)}
    for e in tree:
        a, b = g.edges[e]
        tree_adj[a].append(e)
        tree_adj[b].append(e)
    deg = {v: len(es) for v, es in tree_adj.items()}
    done = set()
    leaves = deque(sorted(v for v in range(g.n_vertices) if deg[v] == 1))
    root = None
    while leaves:
        v = leaves.popleft()
        live = [e for e in tree_adj[v] if e not in done]
        if not live:  # last vertex standing
            root = v
            continue
        (e,) = live
        done.add(e)
        a, b = g.edges[e]
        u = b if v == a else a
        # flow leaving v along e must equal the residual at v
        out_v = residual[v]
        omega[e] = out_v if v == a else -out_v
        residual[v] = zero
        residual[u] = residual[u] + out_v
        deg[u] -= 1
        if deg[u] == 1:
            leaves.append(u)
        elif deg[u] == 0:
            root = u
    if g.n_vertices == 1:
        root = 0
    if check and root is not None and not _residual_zero(residual[root]):
        raise NotSolvable("divergence does not sum to zero")
    return omega


def _residual_zero(x) -> bool:
    if isinstance(x, np.ndarray):
        return bool(np.all(np.abs(x) < 1e-9)) if x.dtype.kind == "f" else bool(np.all(x == 0))
    return _is_zero(x)


def solve_flow_matrix(g: FlowGraph, S: Sequence[int]) -> Tuple[np.ndarray, np.ndarray]:
    """Integer matrices ``(A, B)`` with ``omega = A @ phi + B @ x_S``.

    Obtained by running :func:`solve_flow` on unit vectors (symbolically),
    hence exact.  The solvability condition on ``phi`` is not checked here.
    """
    nv, k = g.n_vertices, len(S)
    width = nv + k
    basis = np.eye(width, dtype=np.int64)
    phi = [basis[v] for v in range(nv)]
    vals = [basis[nv + i] for i in range(k)]
    # the symbolic residual at the root is the formal sum of phi: skip the check
    omega = _peel(g, phi, S, vals, check=False)
    M = np.array(omega, dtype=np.int64).reshape(g.n_edges, width)
    return M[:, :nv], M[:, nv:]


def bareiss_determinant(M: Sequence[Sequence[int]]) -> int:
    """Exact determinant of an integer matrix by fraction-free elimination."""
    A = [[int(x) for x in row] for row in M]
    n = len(A)
    if n == 0:
        return 1
    sign = 1
    prev = 1
    for k in range(n - 1):
        if A[k][k] == 0:
            for r in range(k + 1, n):
                if A[r][k] != 0:
                    A[k], A[r] = A[r], A[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                A[i][j] = (A[i][j] * A[k][k] - A[i][k] * A[k][j]) // prev
        prev = A[k][k]
    return sign * A[n - 1][n - 1]


def laplacian(g: FlowGraph) -> List[List[int]]:
    L = [[0] * g.n_vertices for _ in range(g.n_vertices)]
    for a, b in g.edges:
        L[a][a] += 1
        L[b][b] += 1
        L[a][b] -= 1
        L[b][a] -= 1
    return L


def spanning_tree_count(g: FlowGraph) -> int:
    """Matrix-tree theorem: determinant of the Laplacian minus one row/column."""
    if not g.is_connected():
        raise Disconnected("graph is not connected")
    L = laplacian(g)
    minor = [row[1:] for row in L[1:]]
    return bareiss_determinant(minor)


def volume_normalizer(g: FlowGraph) -> float:
    """``1/sqrt(#spanning trees)``: converts flow-space Lebesgue measure into
    the normalized measure whose cotree push-forward is plain Lebesgue."""
    return 1.0 / float(np.sqrt(spanning_tree_count(g)))


def sieve(g: FlowGraph, W: Sequence[int], W2: Sequence[int]) -> Tuple[FlowGraph, List[int], List[int]]:
    """Merge ``W[i]`` with ``W2[i]`` (both univalent).

    Returns ``(new_graph, vertex_map, edge_map)`` where ``vertex_map[v]`` is the
    new id of old vertex ``v`` and ``edge_map[e]`` the new id of old edge
    ``e`` (the identity: edges keep their order).  Merged vertices take the
    id of the ``W`` side.  Works for pairs inside one component as well
    (contraction).
    """
    W, W2 = [int(v) for v in W], [int(v) for v in W2]
    if len(W) != len(W2):
        raise ValueError("pairing must be a bijection")
    if len(set(W)) != len(W) or len(set(W2)) != len(W2) or set(W) & set(W2):
        raise Overlap("sieving vertex sets must be disjoint and duplicate-free")
    deg = g.degrees()
    for v in W + W2:
        if deg[v] != 1:
            raise NotUnivalent(f"vertex {v} has degree {deg[v]}")
    partner = dict(zip(W2, W))
    keep = [v for v in range(g.n_vertices) if v not in partner]
    new_id = {v: i for i, v in enumerate(keep)}
    vmap = [new_id[partner.get(v, v)] for v in range(g.n_vertices)]
    new_edges = [(vmap[a], vmap[b]) for a, b in g.edges]
    for a, b in new_edges:
        if a == b:
            raise Overlap("sieving would create a self-loop")
    out = FlowGraph(len(keep), new_edges, list(g.payload))
    return out, vmap, list(range(g.n_edges))


def disjoint_union(graphs: Sequence[FlowGraph]) -> Tuple[FlowGraph, List[int]]:
    """Union of graphs; returns the graph and the vertex offset of each part."""
    offsets, edges, payload = [], [], []
    off = 0
    for h in graphs:
        offsets.append(off)
        edges += [(a + off, b + off) for a, b in h.edges]
        payload += list(h.payload)
        off += h.n_vertices
    return FlowGraph(off, edges, payload), offsets


# ---------------------------------------------------------------------------
# text format
# ---------------------------------------------------------------------------


def dump_graph(g: FlowGraph) -> str:
    lines = [f"{g.n_vertices} {g.n_edges}"]
    for (a, b), p in zip(g.edges, g.payload):
        lines.append(f"{a} {b}" if p is None else f"{a} {b} {p}")
    return "\n".join(lines) + "\n"


def load_graph(text: str) -> FlowGraph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    if not rows:
        raise ValueError("empty graph file")
    try:
        nv, ne = int(rows[0][0]), int(rows[0][1])
    except (IndexError, ValueError) as exc:
        raise ValueError("line 1: expected 'n_vertices n_edges'") from exc
    if len(rows) - 1 != ne:
        raise ValueError(f"expected {ne} edge lines, found {len(rows) - 1}")
    edges, payload = [], []
    for i, r in enumerate(rows[1:], start=2):
        try:
            edges.append((int(r[0]), int(r[1])))
        except (IndexError, ValueError) as exc:
            raise ValueError(f"line {i}: expected 'u v [payload]'") from exc
        payload.append(" ".join(r[2:]) if len(r) > 2 else None)
    return FlowGraph(nv, edges, payload)


def to_fraction_list(values: Iterable) -> List[Fraction]:
    return [Fraction(v) for v in values]
