"""Volumes of honeycomb cells in cotree coordinates.

Fix a flow graph with an edge sign ``sigma`` (height ``L_e = sigma_e *
omega_e``), a cone of affine inequalities in the heights, and a cotree ``S``.
Every height is an integer affine function of the divergence ``phi`` and of
the cotree heights ``y``::

    L = L_phi @ phi + L_y @ y

so the cell becomes a polytope ``{y : A y <= b(phi)}`` in ``R^S``.  Its
Lebesgue volume is the normalized summand: the pushforward of the flow-space
volume under the cotree projection divides by ``sqrt(#spanning trees)``.

Two engines: an exact Lasserre recursion (rationals in, rational out) for
small dimension, and rejection sampling from the unit box ``[0, 1]^S``.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog

from . import _backend
from .errors import DimensionTooLarge, NotSolvable
from .flows import FlowGraph, _check_cotree, check_solvable, cotree, solve_flow_matrix

K_MAX = 6


@dataclass(frozen=True)
class VolumeEstimate:
    value: float
    stderr: float = 0.0
    method: str = "exact"
    samples: int = 0
    seed: Optional[int] = None
    flags: Tuple[str, ...] = ()

    def __float__(self):
        return float(self.value)

    def scaled(self, factor) -> "VolumeEstimate":
        f = abs(float(factor))
        value = self.value * factor if isinstance(self.value, Fraction) and isinstance(factor, Fraction) else float(self.value) * float(factor)
        return VolumeEstimate(value, self.stderr * f, self.method, self.samples, self.seed, self.flags)


def combine(estimates: Sequence[VolumeEstimate], method: Optional[str] = None) -> VolumeEstimate:
    """Sum of independent estimates (errors added in quadrature)."""
    if not estimates:
        return VolumeEstimate(Fraction(0), 0.0, method or "exact")
    exact = all(isinstance(e.value, Fraction) for e in estimates)
    value = sum((e.value for e in estimates), Fraction(0)) if exact else sum(float(e.value) for e in estimates)
    err = math.sqrt(sum(e.stderr ** 2 for e in estimates))
    methods = sorted({e.method for e in estimates})
    flags = tuple(sorted({f for e in estimates for f in e.flags}))
    return VolumeEstimate(value, err, method or "+".join(methods), sum(e.samples for e in estimates),
                          estimates[0].seed, flags)


# ---------------------------------------------------------------------------
# Polytopes
# ---------------------------------------------------------------------------


@dataclass
class Polytope:
    """``{y in R^k : A y <= b}`` (closure); rows are plain tuples."""

    A: Tuple[tuple, ...]
    b: tuple
    names: Tuple[int, ...] = ()

    @property
    def dimension(self) -> int:
        return len(self.A[0]) if self.A else len(self.names)

    @property
    def exact(self) -> bool:
        return all(isinstance(x, (int, Fraction)) for x in self.b)

    def contains(self, y) -> bool:
        return all(sum(a * x for a, x in zip(row, y)) <= rhs for row, rhs in zip(self.A, self.b))

    def contains_batch(self, Y: np.ndarray) -> np.ndarray:
        A = np.array([[float(a) for a in row] for row in self.A], dtype=float).reshape(len(self.A), -1)
        b = np.array([float(x) for x in self.b], dtype=float)
        return _backend.inside(A, b, np.asarray(Y, dtype=float))


class CellSystem:
    """The polytope family ``b(phi)`` of one cell, precomputed once.

    ``rows`` are strict cone inequalities ``coef . L + const > 0`` and
    ``nonneg`` closed ones, both keyed by edge id; box bounds
    ``0 <= L_e <= box`` are added for every edge.
    """

    def __init__(self, graph: FlowGraph, edge_sign: Sequence[int], rows, nonneg=(), S=None,
                 box=1, empty: bool = False):
        self.graph = graph
        if S is None:
            S = cotree(graph)
        else:
            _check_cotree(graph, S)
        self.S = sorted(int(e) for e in S)
        self.empty = empty
        A_phi, B = solve_flow_matrix(graph, self.S)
        sig = np.asarray(edge_sign, dtype=np.int64)
        self.edge_sign = sig
        self.L_phi = sig[:, None] * A_phi
        self.L_y = sig[:, None] * B * sig[self.S][None, :]
        E = graph.n_edges
        C, c0 = [], []
        for coef, const in list(rows) + list(nonneg):
            r = np.zeros(E, dtype=np.int64)
            for e, c in coef.items():
                r[e] += c
            C.append(r)
            c0.append(const)
        self.n_cone = len(C)
        eye = np.eye(E, dtype=np.int64)
        C.extend(eye)
        c0.extend([0] * E)
        C.extend(-eye)
        c0.extend([box] * E)
        self.C = np.array(C, dtype=np.int64).reshape(len(C), E)
        self.c0 = list(c0)
        self.A = -(self.C @ self.L_y)
        self.B_phi = self.C @ self.L_phi
        self._Af = self.A.astype(float)
        self._Bf = self.B_phi.astype(float)
        self._c0f = np.array([float(x) for x in self.c0])

    @property
    def dimension(self) -> int:
        return len(self.S)

    def heights(self, phi, y) -> list:
        phi = list(phi)
        out = []
        for e in range(self.graph.n_edges):
            v = sum(int(c) * p for c, p in zip(self.L_phi[e], phi) if c)
            v += sum(int(c) * x for c, x in zip(self.L_y[e], y) if c)
            out.append(v)
        return out

    def rhs(self, phi) -> list:
        phi = list(phi)
        return [sum(int(c) * p for c, p in zip(row, phi) if c) + c0 for row, c0 in zip(self.B_phi, self.c0)]

    def rhs_batch(self, Phi: np.ndarray) -> np.ndarray:
        """``b`` for a batch of divergences, shape ``(rows, batch)``."""
        return self._Bf @ np.asarray(Phi, dtype=float).T + self._c0f[:, None]

    def polytope(self, phi, check: bool = True) -> Polytope:
        if check and not check_solvable(self.graph, phi):
            raise NotSolvable("divergence does not sum to zero on every component")
        b = self.rhs(phi)
        A = tuple(tuple(int(a) for a in row) for row in self.A)
        return Polytope(A, tuple(b), tuple(self.S))

    def inside_batch(self, Phi: np.ndarray, Y: np.ndarray) -> np.ndarray:
        """Row-wise membership of ``Y[i]`` in the polytope of ``Phi[i]``."""
        if self.empty:
            return np.zeros(len(Y), dtype=bool)
        b = self.rhs_batch(Phi)
        return _backend.inside_paired(self._Af, b, np.asarray(Y, dtype=float))

    def lengths_batch(self, Phi: np.ndarray) -> np.ndarray:
        """Exact (float) volumes for a batch when the dimension is 0 or 1."""
        k = self.dimension
        if self.empty:
            return np.zeros(len(Phi))
        b = self.rhs_batch(Phi)
        if k == 0:
            return np.all(b >= -1e-12, axis=0).astype(float)
        if k != 1:
            raise ValueError("lengths_batch needs dimension <= 1")
        return _backend.interval_lengths(self._Af[:, 0], b)


def polytope_from(G, phi, S=None, box=1) -> Polytope:
    """Polytope of a structure graph's cell for divergence ``phi``."""
    from .honeycombs import cone_constraints, flow_from_heights

    cone = cone_constraints(G)
    sign = [G.sign[a] for a, _ in G.graph.edges]
    system = CellSystem(G.graph, sign, cone.rows, cone.nonneg, S=S, box=box, empty=cone.empty)
    return system.polytope(phi)


# ---------------------------------------------------------------------------
# Exact volume: Lasserre recursion
# ---------------------------------------------------------------------------


def _is_zero(x) -> bool:
    return x == 0 if isinstance(x, (int, Fraction)) else abs(x) < 1e-13


def _key(x):
    return x if isinstance(x, (int, Fraction)) else round(float(x), 11)


def _normalize(rows, k) -> Optional[tuple]:
    """Scale rows so the first nonzero coefficient is +-1, drop dominated
    duplicates; ``None`` if a constant row is violated."""
    best: Dict[tuple, object] = {}
    for a, b in rows:
        piv = next((x for x in a if not _is_zero(x)), None)
        if piv is None:
            if b < 0 and not _is_zero(b):
                return None
            continue
        s = abs(piv)
        a2 = tuple(x / s for x in a)
        b2 = b / s
        key = tuple(_key(x) for x in a2)
        if key not in best or b2 < best[key][1]:
            best[key] = (a2, b2)
    return tuple(sorted(best.values(), key=lambda r: tuple(_key(x) for x in r[0]) + (_key(r[1]),)))


def _interior_radius(rows, k) -> float:
    """Radius of the largest ball inside ``{A x <= b}`` (float LP)."""
    A = np.array([[float(x) for x in a] for a, _ in rows])
    b = np.array([float(bb) for _, bb in rows])
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(k + 1)
    c[-1] = -1
    res = linprog(c, A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                  bounds=[(None, None)] * k + [(0, 1)], method="highs")
    if res.status != 0:
        return 0.0
    return float(res.x[-1])


def interior_point(P: Polytope) -> Tuple[Optional[list], float]:
    """Chebyshev center and inradius of ``P`` (float LP); ``(None, 0)`` if
    the polytope has empty interior.  One-dimensional polytopes with exact
    data return the exact interval midpoint."""
    k = P.dimension
    rows = list(zip(P.A, P.b))
    if k == 0:
        ok = all(b >= 0 for b in P.b)
        return ([] if ok else None), 0.0
    if k == 1 and P.exact:
        lo, hi = None, None
        for (a,), b in rows:
            if a > 0:
                hi = Fraction(b, 1) / a if hi is None else min(hi, Fraction(b, 1) / a)
            elif a < 0:
                lo = Fraction(b, 1) / a if lo is None else max(lo, Fraction(b, 1) / a)
            elif b < 0:
                return None, 0.0
        if lo is None or hi is None or hi <= lo:
            return None, 0.0
        return [(lo + hi) / 2], float(hi - lo) / 2
    A = np.array([[float(x) for x in a] for a, _ in rows])
    b = np.array([float(bb) for _, bb in rows])
    norms = np.linalg.norm(A, axis=1)
    c = np.zeros(k + 1)
    c[-1] = -1
    res = linprog(c, A_ub=np.hstack([A, norms[:, None]]), b_ub=b,
                  bounds=[(None, None)] * k + [(0, 1)], method="highs")
    if res.status != 0 or res.x[-1] <= 1e-12:
        return None, 0.0
    return [float(x) for x in res.x[:k]], float(res.x[-1])


class _Lasserre:
    def __init__(self, tol: float):
        self.cache: Dict[tuple, object] = {}
        self.tol = tol

    def volume(self, rows, k):
        if rows is None:
            return 0
        if k == 0:
            return 1
        if k == 1:
            lo, hi = None, None
            for (a,), b in rows:
                if a > 0:
                    hi = b / a if hi is None else min(hi, b / a)
                else:
                    v = b / a
                    lo = v if lo is None else max(lo, v)
            if lo is None or hi is None:
                raise ValueError("unbounded interval")
            return max(hi - lo, 0 * hi)
        key = (k, rows)
        if key in self.cache:
            return self.cache[key]
        if _interior_radius(rows, k) <= self.tol:
            self.cache[key] = 0
            return 0
        total = 0
        for i, (a, b) in enumerate(rows):
            if _is_zero(b):
                continue
            j = max(range(k), key=lambda t: abs(a[t]))
            aj = a[j]
            sub = []
            for t, (c, e) in enumerate(rows):
                if t == i:
                    continue
                f = c[j] / aj
                c2 = tuple(c[l] - f * a[l] for l in range(k) if l != j)
                sub.append((c2, e - f * b))
            sub = _normalize(sub, k - 1)
            vol = self.volume(sub, k - 1)
            if vol:
                total += b / abs(aj) * vol
        total = total / k
        self.cache[key] = total
        return total


def volume_exact(P: Polytope, k_max: int = K_MAX, tol: float = 1e-10):
    """Exact Lebesgue volume (a :class:`Fraction` for rational input).

    Lasserre's recursion ``V(P) = (1/k) sum_i b_i V(proj_j F_i) / |a_ij|``
    over facets ``F_i`` eliminated along a pivot coordinate ``j``.  Facets
    are recognized with a floating point LP (``tol`` on the inner radius);
    lower dimensional pieces contribute 0.
    """
    k = P.dimension
    if k > k_max:
        raise DimensionTooLarge(f"dimension {k} exceeds k_max={k_max}")
    exact = P.exact
    conv = Fraction if exact else float
    rows = [(tuple(conv(x) for x in a), conv(b)) for a, b in zip(P.A, P.b)]
    if k == 0:
        return Fraction(1) if all(b >= 0 for _, b in rows) else Fraction(0)
    norm = _normalize(rows, k)
    v = _Lasserre(tol).volume(norm, k)
    return Fraction(v) if exact else float(v)


# ---------------------------------------------------------------------------
# Monte Carlo
# ---------------------------------------------------------------------------


def _batches(samples: int, batch: int) -> List[int]:
    sizes = [batch] * (samples // batch)
    if samples % batch:
        sizes.append(samples % batch)
    return sizes


def volume_mc(membership: Callable[[np.ndarray], np.ndarray], k: int, samples: int, seed: int = 0,
              batch: int = 1 << 15, jobs: int = 1) -> VolumeEstimate:
    """Hit rate of uniform points of ``[0, 1]^k`` (with ``sqrt(p(1-p)/N)``).

    Batch ``i`` draws from stream ``i`` spawned from ``seed``, so the result
    does not depend on ``jobs``; counts are reduced in batch order.
    """
    if samples < 1:
        raise ValueError("samples must be >= 1")
    sizes = _batches(samples, batch)
    streams = np.random.SeedSequence(seed).spawn(len(sizes))

    def run(i):
        rng = np.random.default_rng(streams[i])
        Y = rng.random((sizes[i], k))
        return int(np.count_nonzero(membership(Y)))

    if jobs > 1 and len(sizes) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            hits = list(pool.map(run, range(len(sizes))))
    else:
        hits = [run(i) for i in range(len(sizes))]
    p = sum(hits) / samples
    return VolumeEstimate(p, math.sqrt(p * (1 - p) / samples), "mc", samples, seed)


# ---------------------------------------------------------------------------
# Summands
# ---------------------------------------------------------------------------


def cell_system(G) -> CellSystem:
    """Cached :class:`CellSystem` of a structure graph (default cotree)."""
    sys_ = getattr(G, "_cell_system", None)
    if sys_ is None:
        from .honeycombs import cone_constraints

        cone = cone_constraints(G)
        sign = [G.sign[a] for a, _ in G.graph.edges]
        sys_ = CellSystem(G.graph, sign, cone.rows, cone.nonneg, empty=cone.empty)
        G._cell_system = sys_
    return sys_


def system_volume(system: CellSystem, phi, method: str = "auto", samples: int = 100_000, seed: int = 0,
                  k_max: int = K_MAX, jobs: int = 1) -> VolumeEstimate:
    if system.empty:
        return VolumeEstimate(Fraction(0), 0.0, "empty")
    P = system.polytope(phi)
    k = P.dimension
    if method == "auto":
        method = "exact" if k <= min(k_max, 4) else "mc"
    if method == "exact":
        v = volume_exact(P, k_max=k_max)
        return VolumeEstimate(v, 0.0, "exact" if P.exact else "exact-float")
    if method == "mc":
        if k == 0:
            return VolumeEstimate(volume_exact(P), 0.0, "exact")
        return volume_mc(P.contains_batch, k, samples, seed, jobs=jobs)
    raise ValueError(f"unknown method {method!r}")


def volume_summand(G, alpha, beta, gamma, method: str = "auto", samples: int = 100_000, seed: int = 0,
                   k_max: int = K_MAX, strict: bool = False, jobs: int = 1) -> VolumeEstimate:
    """Cotree-projected volume of the cell of ``G`` for hive boundary
    ``(alpha, beta, gamma)``.

    An unsolvable boundary (wrong ``d``) gives 0 flagged ``NotSolvable``
    unless ``strict`` is set, in which case the error propagates.
    """
    from .honeycombs import boundary_divergence

    try:
        phi = boundary_divergence(G, alpha, beta, gamma)
    except NotSolvable:
        if strict:
            raise
        return VolumeEstimate(Fraction(0), 0.0, "none", flags=("NotSolvable",))
    return system_volume(cell_system(G), phi, method, samples, seed, k_max, jobs)
