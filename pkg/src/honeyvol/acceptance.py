"""Acceptance checks shared by the test-suite and ``honeyvol selftest``.

Each check returns a :class:`CheckResult`; ``run(level)`` executes the
structural checks (``fast``) or everything including oracle cross-checks
(``full``).
"""

from __future__ import annotations

import itertools
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Dict, List, Optional

import numpy as np


@dataclass
class CheckResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0
    data: dict = field(default_factory=dict)

    def line(self) -> str:
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] criterion {self.number}: {self.name} -- {self.detail} ({self.seconds:.1f}s)"

    def to_dict(self) -> dict:
        return {"criterion": self.number, "name": self.name, "passed": self.passed, "detail": self.detail,
                "seconds": round(self.seconds, 3)}


def _timed(number: int, name: str, fn: Callable[[], tuple]) -> CheckResult:
    t = time.perf_counter()
    passed, detail, data = fn()
    return CheckResult(number, name, bool(passed), detail, time.perf_counter() - t, data)


# ---------------------------------------------------------------------------
# helpers
# ---------------------------------------------------------------------------


def brute_force_tree_count(n_vertices: int, edges) -> int:
    """Count spanning trees by testing every ``(V-1)``-subset of edges."""
    count = 0
    for subset in itertools.combinations(range(len(edges)), n_vertices - 1):
        parent = list(range(n_vertices))

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        ok = True
        for e in subset:
            a, b = edges[e]
            ra, rb = find(a), find(b)
            if ra == rb:
                ok = False
                break
            parent[ra] = rb
        count += ok
    return count


def random_minor(g, max_vertices: int, rng: np.random.Generator):
    """Contract random edges (dropping self-loops) until few vertices remain."""
    from .flows import FlowGraph

    edges = list(g.edges)
    nv = g.n_vertices
    while nv > max_vertices and edges:
        a, b = edges[int(rng.integers(len(edges)))]
        relabel = lambda v: a if v == b else (v - 1 if v > b else v)  # noqa: E731
        edges = [(relabel(x), relabel(y)) for x, y in edges]
        edges = [(x, y) for x, y in edges if x != y]
        nv -= 1
    return FlowGraph(nv, edges)


def random_spanning_tree(g, rng: np.random.Generator) -> List[int]:
    order = rng.permutation(g.n_edges)
    parent = list(range(g.n_vertices))

    def find(x):
        while parent[x] != x:
            x = parent[x]
        return x

    tree = []
    for e in order:
        a, b = g.edges[int(e)]
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[ra] = rb
            tree.append(int(e))
    return sorted(tree)


def product_boundary(n: int, d: int, rng: np.random.Generator, denominator: int = 10007, tries: int = 2000):
    """Exact rational ``(alpha, beta, gamma_hive)`` near a Haar product with
    ``|alpha| + |beta| - |gamma_hive| = d``."""
    from .classes import AngleVector
    from .yangmills import haar_unitary

    for _ in range(tries):
        a = -np.sort(-rng.random(n))
        b = -np.sort(-rng.random(n))
        P, Q = haar_unitary(n, 2, rng)
        U = (P * np.exp(2j * np.pi * a)) @ P.conj().T
        V = (Q * np.exp(2j * np.pi * b)) @ Q.conj().T
        c = np.mod(np.angle(np.linalg.eigvals(U @ V)) / (2 * np.pi), 1.0)
        c = -np.sort(-c)
        if round(a.sum() + b.sum() - c.sum()) != d:
            continue
        fa = [Fraction(round(x * denominator), denominator) for x in a]
        fb = [Fraction(round(x * denominator), denominator) for x in b]
        fc = [Fraction(round(x * denominator), denominator) for x in c[:-1]]
        fc.append(sum(fa) + sum(fb) - d - sum(fc))
        vecs = [fa, fb, fc]
        if all(0 <= x < 1 for v in vecs for x in v) and all(
                all(v[i] > v[i + 1] for i in range(n - 1)) for v in vecs):
            return tuple(AngleVector(tuple(v)) for v in vecs)
    raise RuntimeError(f"no product boundary found for n={n}, d={d}")


def random_regular(n: int, rng: np.random.Generator):
    from .classes import standardize

    return standardize(-np.sort(-rng.random(n)))


# ---------------------------------------------------------------------------
# criteria
# ---------------------------------------------------------------------------


def check_structural_counts() -> CheckResult:
    from .honeycombs import structure_graphs
    from .hivegrid import build_grid, enumerate_color_maps, m_count

    def run():
        bad, seen = [], 0
        for n in (3, 4):
            for d in range(n + 1):
                grid = build_grid(n, d)
                maps = enumerate_color_maps(grid)
                for cm, G in zip(maps, structure_graphs(n, d)):
                    seen += 1
                    if G.graph.n_vertices != n * n + 3 * n or G.graph.n_edges != 3 * n * (n + 1) // 2:
                        bad.append((n, d, "size", G.graph.n_vertices, G.graph.n_edges))
                    if m_count(cm) != d * (n - d):
                        bad.append((n, d, "m", m_count(cm)))
        return not bad, f"{seen} reduced graphs checked, {len(bad)} violations", {"violations": bad[:5]}

    return _timed(1, "structural counts", run)


def check_spanning_trees(seed: int = 1) -> CheckResult:
    from .flows import FlowGraph, spanning_tree_count
    from .honeycombs import structure_graphs

    def run():
        rng = np.random.default_rng(seed)
        cases = []
        for n in (1, 2, 3, 4):
            for d in range(n + 1):
                for G in structure_graphs(n, d):
                    if G.graph.n_vertices <= 8:
                        cases.append(G.graph)
        for k in range(2, 7):  # complete graphs and a doubled cycle
            cases.append(FlowGraph(k, list(itertools.combinations(range(k), 2))))
        cases.append(FlowGraph(5, [(i, (i + 1) % 5) for i in range(5)] * 2))
        pool = [G.graph for n in (3, 4) for d in range(1, n) for G in structure_graphs(n, d)]
        for _ in range(20):
            g = pool[int(rng.integers(len(pool)))]
            cases.append(random_minor(g, int(rng.integers(4, 9)), rng))
        bad = 0
        for g in cases:
            if not g.is_connected():
                continue
            if spanning_tree_count(g) != brute_force_tree_count(g.n_vertices, g.edges):
                bad += 1
        return bad == 0, f"{len(cases)} graphs, {bad} mismatches", {}

    return _timed(2, "spanning trees (matrix-tree vs brute force)", run)


def check_flow_integrality(seed: int = 2, instances: int = 100) -> CheckResult:
    from .flows import cotree, divergence, solve_flow
    from .honeycombs import structure_graphs

    def run():
        rng = np.random.default_rng(seed)
        pool = [G.graph for n in (2, 3, 4) for d in range(n + 1) for G in structure_graphs(n, d)]
        bad = 0
        for _ in range(instances):
            g = pool[int(rng.integers(len(pool)))]
            phi = [int(x) for x in rng.integers(-5, 6, g.n_vertices)]
            for comp in g.components():
                phi[comp[0]] -= sum(phi[v] for v in comp)
            S = cotree(g, random_spanning_tree(g, rng))
            vals = [int(x) for x in rng.integers(-5, 6, len(S))]
            omega = solve_flow(g, phi, S, vals)
            ints = all(isinstance(x, (int, np.integer)) for x in omega)
            if not ints or [int(x) for x in divergence(g, omega)] != phi:
                bad += 1
        return bad == 0, f"{instances} instances, {bad} failures", {}

    return _timed(3, "flow integrality and round trip", run)


def check_volume_engines(seed: int = 3, samples: int = 1_000_000, boundaries: int = 4) -> CheckResult:
    from .flows import cotree
    from .honeycombs import boundary_divergence, cone_constraints, structure_graphs
    from .volumes import CellSystem, volume_exact, volume_mc

    def run():
        rng = np.random.default_rng(seed)
        worst, cells, nonzero, cotree_bad, mc_cotree_worst = 0.0, 0, 0, 0, 0.0
        for n in (3, 4):
            for d, rep in itertools.product(range(1, n), range(boundaries)):
                alpha, beta, gamma = product_boundary(n, d, rng)
                for gi, G in enumerate(structure_graphs(n, d)):
                    cone = cone_constraints(G)
                    if cone.empty:
                        continue
                    sign = [G.sign[a] for a, _ in G.graph.edges]
                    phi = boundary_divergence(G, alpha, beta, gamma)
                    S1 = cotree(G.graph)
                    S2 = cotree(G.graph, random_spanning_tree(G.graph, rng))
                    P1 = CellSystem(G.graph, sign, cone.rows, cone.nonneg, S=S1).polytope(phi)
                    P2 = CellSystem(G.graph, sign, cone.rows, cone.nonneg, S=S2).polytope(phi)
                    v1, v2 = volume_exact(P1), volume_exact(P2)
                    cells += 1
                    nonzero += v1 > 0
                    if v1 != v2:
                        cotree_bad += 1
                    e1 = volume_mc(P1.contains_batch, P1.dimension, samples, seed=seed + 2 * gi)
                    e2 = volume_mc(P2.contains_batch, P2.dimension, samples, seed=seed + 2 * gi + 1)
                    for e in (e1,):
                        err = max(e.stderr, 1.0 / samples)
                        worst = max(worst, abs(float(e.value) - float(v1)) / err)
                    joint = max(math.hypot(e1.stderr, e2.stderr), 1.0 / samples)
                    mc_cotree_worst = max(mc_cotree_worst, abs(float(e1.value) - float(e2.value)) / joint)
        ok = worst <= 3 and cotree_bad == 0 and mc_cotree_worst <= 3
        detail = (f"{cells} cells ({nonzero} nonempty): max |exact-MC|/stderr = {worst:.2f}; "
                  f"exact cotree mismatches = {cotree_bad}; MC cotree max z = {mc_cotree_worst:.2f}")
        return ok, detail, {"worst_z": worst}

    return _timed(4, "volume engine agreement", run)


WORKED_BOUNDARY = ("14/23,7/23,2/23", "18/23,10/23,3/23", "19/23,10/23,2/23")


def check_worked_instance() -> CheckResult:
    from .assembler import z03
    from .classes import complement, parse_angles
    from .honeycombs import structure_graphs
    from .volumes import volume_summand

    def run():
        a, b, g = (parse_angles(x) for x in WORKED_BOUNDARY)
        vols = [volume_summand(G, a, b, g, method="exact").value for G in structure_graphs(3, 1)]
        positive = [v for v in vols if v > 0]
        z = z03(a, b, complement(g), method="exact").value
        return len(positive) >= 1 and z > 0, f"{len(positive)} positive cells (volumes {positive}); z03 = {float(z):.6g}", {}

    return _timed(5, "worked instance (n=3, d=1)", run)


def _quad_boundaries(rng, n=3):
    from .classes import standardize
    from .yangmills import haar_unitary

    # four classes whose product can be the identity
    while True:
        cls = [-np.sort(-rng.random(n)) for _ in range(3)]
        Us = []
        for c in cls:
            P = haar_unitary(n, 1, rng)[0]
            Us.append((P * np.exp(2j * np.pi * c)) @ P.conj().T)
        W = np.linalg.inv(Us[0] @ Us[1] @ Us[2])
        last = np.mod(np.angle(np.linalg.eigvals(W)) / (2 * np.pi), 1.0)
        out = [standardize(c) for c in cls] + [standardize(last)]
        if all(o.is_regular() for o in out):
            tot = sum(sum(o.as_array()) for o in out)
            fixed = out[3].as_array()
            fixed[-1] += round(tot) - tot
            out[3] = standardize(fixed)
            return out


def check_pants_independence(seed: int = 6, samples: int = 1_000_000) -> CheckResult:
    from .assembler import pants_surface, z_gp

    def run():
        rng = np.random.default_rng(seed)
        bnds = _quad_boundaries(rng)
        hints = [(2, 1), (0, 0)]
        ests = [z_gp(pants_surface(0, 4, h), bnds, method="mc", samples=samples, seed=seed) for h in hints]
        exact = [z_gp(pants_surface(0, 4, h), bnds, method="exact").value for h in hints]
        joint = math.hypot(ests[0].stderr, ests[1].stderr)
        z = abs(ests[0].value - ests[1].value) / joint if joint else float("inf")
        rel = abs(exact[0] - exact[1]) / max(abs(exact[0]), 1e-300)
        return z <= 3, (f"MC {ests[0].value:.5g}+-{ests[0].stderr:.2g} vs {ests[1].value:.5g}+-{ests[1].stderr:.2g} "
                        f"(z = {z:.2f}); exact engines agree to {rel:.1e}"), {}

    return _timed(6, "pants independence (0,4)", run)


def check_gluing_identities(seed: int = 7, samples: int = 1_000_000) -> CheckResult:
    from .assembler import pants_surface, z_gp
    from .classes import standardize

    def run():
        rng = np.random.default_rng(seed)
        out, zs = [], []
        cases = [(pants_surface(0, 4), _quad_boundaries(rng)), (pants_surface(1, 1), [standardize([0.7, 0.25, 0.05])])]
        for spec, bnds in cases:
            direct = z_gp(spec, bnds, method="exact")
            it = z_gp(spec, bnds, method="iterated", samples=samples, seed=seed)
            joint = math.hypot(direct.stderr, it.stderr)
            z = abs(float(direct.value) - it.value) / joint
            zs.append(z)
            out.append(f"({spec.g},{spec.p}): direct {float(direct.value):.6g} vs iterated {it.value:.6g}+-{it.stderr:.2g}"
                       f" (z = {z:.2f})")
        return max(zs) <= 3, "; ".join(out), {}

    return _timed(7, "direct vs iterated gluing", run)


def check_oracle_ratios(seed: int = 8, calib_samples: int = 2_000_000, samples: int = 3_000_000,
                        hist_samples: int = 1_000_000) -> CheckResult:
    from scipy.stats import spearmanr

    from .assembler import c03_default, pants_surface, prefactor_batch
    from .classes import slice_sample_batch, vandermonde_batch
    from .honeycombs import triangle_volume_batch
    from .yangmills import calibrate, lattice_oracle, orbit_product_sampler, ym_smoothed

    def run():
        rng = np.random.default_rng(seed)
        cal = calibrate(3, 0.5, samples=calib_samples, seed=seed)
        spec = pants_surface(0, 3)
        errs = []
        while len(errs) < 5:
            tri = [random_regular(3, rng) for _ in range(3)]
            lat = lattice_oracle(0, 3, 0.5, tri)
            if abs(lat) < 1e-3:
                continue
            sm = ym_smoothed(spec, 0.5, tri, samples=samples, seed=seed + len(errs) + 1, constant=cal["c03"])
            errs.append(abs(sm.value / lat - 1))
        # spectral histogram of (UV)^{-1}
        a = np.array([0.8, 0.45, 0.1])
        b = np.array([0.7, 0.4, 0.15])
        emp = orbit_product_sampler(a, b, hist_samples, seed=seed)
        counts, edges = np.histogram(emp[:, 0], bins=20, range=(0, 1))
        resid = float(np.mod(-(a.sum() + b.sum()), 1.0))
        G = slice_sample_batch(resid, rng, 3, 400_000)
        M = len(G)
        X0 = np.tile(b, (M, 1))
        X1 = np.tile(a, (M, 1))
        X2 = G
        z = triangle_volume_batch(3, X0, X1, X2) * prefactor_batch(spec, 3, [X1, X0, X2], c03_default(3))
        w = z * vandermonde_batch(G) ** 2
        pred, _ = np.histogram(G[:, 0], bins=edges, weights=w)
        rho = spearmanr(counts, pred).correlation
        ok = max(errs) <= 0.05 and rho >= 0.99
        detail = (f"calibrated c03 = {cal['c03']:.4g} (ratio {cal['ratio']:.4g}); max relative error on 5 triples "
                  f"= {max(errs):.3%}; histogram Spearman = {rho:.4f}")
        return ok, detail, {"errors": errs, "spearman": rho}

    return _timed(8, "oracle ratios", run)


def check_kernel_analytics() -> CheckResult:
    from scipy.integrate import quad

    from .classes import vandermonde
    from .yangmills import circle_heat_kernel, dyson_kernel, dyson_kernel_batch

    def run():
        norm_err = 0.0
        for T in (0.05, 0.5, 0.999, 1.0, 3.0):
            val = quad(lambda y: circle_heat_kernel(T, 0.7, y), 0, 2 * math.pi, limit=200, epsabs=1e-13,
                       epsrel=1e-13)[0]
            norm_err = max(norm_err, abs(val - 1))
        rng = np.random.default_rng(9)
        db = 0.0
        for n in (2, 3, 4):
            for _ in range(5):
                x = -np.sort(-rng.random(n))
                y = -np.sort(-rng.random(n))
                lhs = vandermonde(x) ** 2 * dyson_kernel(0.4, x, y)
                rhs = vandermonde(y) ** 2 * dyson_kernel(0.4, y, x)
                db = max(db, abs(lhs - rhs) / max(abs(lhs), 1e-300))
        ck = 0.0
        for n, m in ((2, 120), (3, 48)):
            x = -np.sort(-rng.random(n))
            y = -np.sort(-rng.random(n))
            s, t = 0.35, 0.25
            grid = (np.arange(m) + 0.5) / m
            U = np.array(list(itertools.product(grid, repeat=n)))
            U = U[np.all(np.diff(U, axis=1) < 0, axis=1)]
            f = dyson_kernel_batch(s, np.tile(x, (len(U), 1)), U) * dyson_kernel_batch(t, U, np.tile(y, (len(U), 1)))
            integral = f.sum() / m ** n
            direct = dyson_kernel(s + t, x, y)
            ck = max(ck, abs(integral - direct) / abs(direct))
        ok = norm_err <= 1e-10 and db <= 1e-12 and ck <= 1e-3
        return ok, f"circle normalization {norm_err:.1e}; detailed balance {db:.1e}; Chapman-Kolmogorov {ck:.1e}", {}

    return _timed(9, "kernel analytics", run)


def check_slice_mass(seed: int = 10, samples: int = 2_000_000) -> CheckResult:
    from .classes import slice_mass_mc

    def run():
        rng = np.random.default_rng(seed)
        zs = []
        for n in (3, 4):
            for r in (0.0, 0.37):
                m, err = slice_mass_mc(r, n, samples, rng)
                zs.append(abs(m - 1 / math.factorial(n)) / err)
        return max(zs) <= 3, f"max |mass - 1/n!|/stderr = {max(zs):.2f}", {}

    return _timed(10, "slice mass", run)


FAST = (1, 2, 3, 5, 9, 10)
CHECKS: Dict[int, Callable[[], CheckResult]] = {
    1: check_structural_counts,
    2: check_spanning_trees,
    3: check_flow_integrality,
    4: check_volume_engines,
    5: check_worked_instance,
    6: check_pants_independence,
    7: check_gluing_identities,
    8: check_oracle_ratios,
    9: check_kernel_analytics,
    10: check_slice_mass,
}


def run(level: str = "fast", only: Optional[List[int]] = None) -> List[CheckResult]:
    if level not in ("fast", "full"):
        raise ValueError(f"unknown level {level!r}")
    numbers = only or (list(FAST) if level == "fast" else sorted(CHECKS))
    return [CHECKS[k]() for k in numbers]
