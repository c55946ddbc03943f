"""Heat kernels, Yang-Mills marginals and the independent oracles.

Conventions: classes are angle vectors in turns; the circle heat kernel is a
density in radians for the generator ``(1/2) d^2/dx^2``; the Dyson kernel
``k_T(x, y)`` is the transition density of the eigenvalue classes of
unitary Brownian motion with respect to Lebesgue measure on sorted vectors
(turns), so ``int k_T(x, y) dy = 1``.

The lattice oracle is the character expansion of the heat-kernel lattice
gauge partition function, normalized as a density against Haar measure on
each boundary holonomy.
"""

from __future__ import annotations

import itertools
import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from .classes import EPS_REG, AngleVector, complement, standardize, vandermonde, vandermonde_batch
from .errors import InvalidTree, NonpositiveTime, NotRegular, TruncationInsufficient

# ---------------------------------------------------------------------------
# Circle
# ---------------------------------------------------------------------------


def _check_time(T):
    if not T > 0:
        raise NonpositiveTime(f"time must be positive, got {T}")


def circle_heat_kernel(T, x, y, twisted: bool = False):
    """``p_T(x, y)`` on the circle of length ``2 pi`` (radians).

    Wrapped Gaussian for ``T < 1``, Fourier series for ``T >= 1``.  With
    ``twisted`` the images alternate in sign (half-integer frequencies), the
    kernel of the antiperiodic sector used by the Dyson kernel at even ``n``.
    Broadcasts over array inputs.
    """
    _check_time(T)
    diff = np.asarray(x, dtype=float) - np.asarray(y, dtype=float)
    wraps = np.floor((diff + math.pi) / (2 * math.pi))
    diff = diff - 2 * math.pi * wraps
    parity = np.where(np.mod(wraps, 2) == 1, -1.0, 1.0) if twisted else 1.0
    if T < 1:
        M = int(math.ceil(math.sqrt(2 * T * 40) / (2 * math.pi))) + 1
        out = np.zeros_like(diff)
        for m in range(-M, M + 1):
            w = -1.0 if (twisted and m % 2) else 1.0
            out = out + w * np.exp(-((diff + 2 * math.pi * m) ** 2) / (2 * T))
        return parity * out / math.sqrt(2 * math.pi * T)
    K = int(math.ceil(math.sqrt(2 * 40 / T))) + 2
    if twisted:
        ks = np.arange(K) + 0.5
        terms = 2 * np.exp(-ks ** 2 * T / 2) * np.cos(np.multiply.outer(diff, ks))
        return parity * terms.sum(axis=-1) / (2 * math.pi)
    ks = np.arange(1, K + 1)
    terms = 2 * np.exp(-ks ** 2 * T / 2) * np.cos(np.multiply.outer(diff, ks))
    return (1 + terms.sum(axis=-1)) / (2 * math.pi)


# ---------------------------------------------------------------------------
# Dyson kernel
# ---------------------------------------------------------------------------


def rho_norm2(n: int) -> float:
    """``|rho|^2 = n (n^2 - 1) / 12``."""
    return n * (n * n - 1) / 12.0


def _as_array(x) -> np.ndarray:
    if isinstance(x, AngleVector):
        return x.as_array()
    return np.asarray(x, dtype=float)


def dyson_kernel_batch(T, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    """Row-wise ``k_T(X[i], Y[i])`` (rows sorted decreasingly)."""
    _check_time(T)
    X = np.atleast_2d(np.asarray(X, dtype=float))
    Y = np.atleast_2d(np.asarray(Y, dtype=float))
    n = X.shape[1]
    twisted = n % 2 == 0
    P = circle_heat_kernel(T, 2 * np.pi * X[:, :, None], 2 * np.pi * Y[:, None, :], twisted=twisted)
    det = np.linalg.det(P)
    dx = vandermonde_batch(X)
    dy = vandermonde_batch(Y)
    return math.exp(T * rho_norm2(n) / 2) * (2 * math.pi) ** n * dy / dx * det


def dyson_kernel(T, x, y) -> float:
    """``k_T(x, y) = e^{T|rho|^2/2} (2 pi)^n Delta(y)/Delta(x) det[p_T(2 pi x_i, 2 pi y_j)]``."""
    _check_time(T)
    for v in (x, y):
        if isinstance(v, AngleVector):
            if not v.is_regular():
                raise NotRegular(f"class {v} is not regular")
        elif len(v) > 1 and np.min(np.abs(np.diff(np.asarray(v, dtype=float)))) < EPS_REG:
            raise NotRegular(f"class {list(v)} is not regular")
    return float(dyson_kernel_batch(T, _as_array(x)[None], _as_array(y)[None])[0])


def cylinder_z(T, alpha1, alpha2) -> float:
    """``Z_{0,2,T}(alpha1, alpha2) = k_T(alpha1, alpha2) / Delta(alpha2)^2``."""
    if isinstance(alpha2, AngleVector) and not alpha2.is_regular():
        raise NotRegular(f"class {alpha2} is not regular")
    return dyson_kernel(T, alpha1, alpha2) / vandermonde(alpha2) ** 2


# ---------------------------------------------------------------------------
# Characters and the lattice oracle
# ---------------------------------------------------------------------------


@dataclass
class WeightTable:
    """Dominant weights with ``max |lambda_i| <= R``, shifted ``l = lambda + delta``."""

    n: int
    R: int
    shifted: np.ndarray  # (L, n), strictly decreasing rows
    dims: np.ndarray
    casimir: np.ndarray
    radius: np.ndarray  # max |lambda_i| per row

    @property
    def weights(self) -> np.ndarray:
        return self.shifted - (self.n - 1 - np.arange(self.n))[None, :]


_TABLES: Dict[Tuple[int, int], WeightTable] = {}


def weight_table(n: int, R: int) -> WeightTable:
    key = (n, R)
    if key in _TABLES:
        return _TABLES[key]
    combos = np.array(list(itertools.combinations(range(R + n - 1, -R - 1, -1), n)), dtype=np.int64)
    shifted = combos.reshape(-1, n)
    delta = n - 1 - np.arange(n)
    lam = shifted - delta[None, :]
    dims = np.ones(len(shifted))
    for i in range(n):
        for j in range(i + 1, n):
            dims *= (shifted[:, i] - shifted[:, j]) / (j - i)
    half = (n - 1) / 2.0
    cas = np.sum((shifted - half) ** 2, axis=1) - np.sum((delta - half) ** 2)
    table = WeightTable(n, R, shifted, dims, cas.astype(float), np.max(np.abs(lam), axis=1))
    _TABLES[key] = table
    return table


def characters(table: WeightTable, alpha) -> np.ndarray:
    """``chi_lambda(alpha)`` for every weight (Weyl's formula); the identity
    class uses the dimension formula."""
    a = _as_array(alpha)
    n = table.n
    if np.allclose(a, a[0]) and n > 1:
        # scalar matrix exp(2 pi i a): chi = d_lambda * exp(2 pi i a |lambda|)
        lam_sum = table.weights.sum(axis=1)
        return table.dims * np.exp(2j * np.pi * a[0] * lam_sum)
    if n > 1 and np.min(np.abs(np.diff(np.sort(a)))) < 1e-12:
        raise NotRegular("Weyl's formula needs a regular class or a scalar")
    delta = n - 1 - np.arange(n)
    num = np.exp(2j * np.pi * a[None, :, None] * table.shifted[:, None, :])
    den = np.linalg.det(np.exp(2j * np.pi * a[:, None] * delta[None, :]))
    return np.linalg.det(num) / den


def lattice_terms(g: int, p: int, T: float, alphas: Sequence, table: WeightTable) -> np.ndarray:
    terms = table.dims ** (2 - 2 * g - p) * np.exp(-T * table.casimir / 2)
    for a in alphas:
        terms = terms * characters(table, a)
    return terms


def lattice_oracle(g: int, p: int, T: float, alphas: Sequence = (), R: Optional[int] = None,
                   rel_tol: float = 1e-6, R_max: Optional[int] = None) -> float:
    """``sum_lambda d^{2-2g-p} e^{-T c_2/2} prod chi_lambda(alpha_i)``.

    Shells by ``max |lambda_i|``; the radius doubles until the outermost
    shell contributes less than ``rel_tol`` relative to the total.
    """
    _check_time(T)
    if len(alphas) != p:
        raise ValueError(f"{len(alphas)} classes for p={p}")
    n = _as_array(alphas[0]).size if alphas else None
    if n is None:
        raise ValueError("pass n through a class; use lattice_oracle_closed for p = 0")
    return _lattice(n, g, p, T, alphas, R, rel_tol, R_max)


def lattice_oracle_closed(n: int, g: int, T: float, R: Optional[int] = None, rel_tol: float = 1e-6) -> float:
    """Closed surfaces: ``sum_lambda d^{2-2g} e^{-T c_2/2}``."""
    _check_time(T)
    return _lattice(n, g, 0, T, (), R, rel_tol, None)


def _lattice(n, g, p, T, alphas, R, rel_tol, R_max):
    if R_max is None:
        R_max = {1: 4096, 2: 512, 3: 96, 4: 32}.get(n, 12)
    R = R or max(4, int(math.ceil(math.sqrt(2 * 20 / max(T, 1e-12)))) // 2)
    R = min(R, R_max)
    while True:
        table = weight_table(n, R)
        terms = lattice_terms(g, p, T, alphas, table)
        total = terms.sum()
        shell = terms[table.radius == R].sum()
        if abs(shell) <= rel_tol * abs(total):
            return float(total.real)
        if R >= R_max:
            raise TruncationInsufficient(f"outer shell R={R} carries {abs(shell / total):.2e} of the sum")
        R = min(2 * R, R_max)


def dyson_kernel_series(T, x, y, R: Optional[int] = None) -> float:
    """``k_T(x, y) = Delta(y)^2 sum_lambda e^{-T c_2/2} chi(x) conj(chi(y))`` (oracle route)."""
    x, y = _as_array(x), _as_array(y)
    n = x.size
    R = R or max(6, int(math.ceil(math.sqrt(2 * 40 / T))) + 2)
    table = weight_table(n, R)
    s = np.sum(np.exp(-T * table.casimir / 2) * characters(table, x) * np.conj(characters(table, y)))
    return float((vandermonde(y) ** 2 * s).real)


def disc_z(A, alpha, R: Optional[int] = None) -> float:
    """Disc vertex: the heat kernel at ``alpha`` against Haar, ``sum d e^{-A c_2/2} chi``."""
    return lattice_oracle(0, 1, A, [alpha], R=R)


def disc_z_dyson(A, alpha, eps: float = 2e-3) -> float:
    """Disc vertex by the Dyson route: ``k_A(x, alpha)/Delta(alpha)^2`` as
    ``x`` shrinks to the identity (Richardson extrapolation in ``eps``)."""
    a = _as_array(alpha)
    n = a.size

    def at(e):
        x = e * (np.arange(n)[::-1] - (n - 1) / 2.0)
        x = np.mod(x, 1.0)
        x = -np.sort(-x)
        return dyson_kernel(A, x, a) / vandermonde(a) ** 2

    f1, f2 = at(eps), at(eps / 2)
    return (4 * f2 - f1) / 3


# ---------------------------------------------------------------------------
# Smoothing honeycomb volumes
# ---------------------------------------------------------------------------


def _wrapped_normal(x, sigma):
    x = np.mod(x + 0.5, 1.0) - 0.5
    out = np.zeros_like(x)
    for m in (-1, 0, 1):
        out = out + np.exp(-((x + m) ** 2) / (2 * sigma ** 2))
    return out / (sigma * math.sqrt(2 * math.pi))


def _gaussian_proposal(center: np.ndarray, sigma: float, size: int, rng: np.random.Generator):
    """Sorted ``center + noise mod 1`` and its density on sorted vectors."""
    n = center.size
    raw = np.mod(center[None, :] + sigma * rng.standard_normal((size, n)), 1.0)
    v = -np.sort(-raw, axis=1)
    dens = np.zeros(size)
    for perm in itertools.permutations(range(n)):
        term = np.ones(size)
        for j in range(n):
            term *= _wrapped_normal(v[:, perm[j]] - center[j], sigma)
        dens += term
    return v, dens


def _complement_rows(v: np.ndarray) -> np.ndarray:
    return -np.sort(-np.mod(1.0 - v, 1.0), axis=1)


@dataclass
class SmoothedEstimate:
    value: float
    stderr: float
    samples: int
    seed: int
    pairing: Tuple[int, ...] = ()


def ym_smoothed(spec, T, alphas: Sequence, samples: int = 200_000, seed: int = 0, constant: Optional[float] = None,
                literal_order: bool = False, batch: int = 50_000) -> SmoothedEstimate:
    """``int Z_{g,p}(u) prod_i k_{T/p}(alpha_i, 1 - u_i) du``.

    The classes ``1 - u_i`` (``i < p``) are drawn near ``alpha_i`` from a
    Gaussian proposal (importance weights exact, including all orderings);
    ``1 - u_p`` is uniform on the slice fixed by ``sum |u_i| in Z``.  The
    flat volume ``Z_{g,p}`` is evaluated per draw (exactly when the cells
    are at most one dimensional, otherwise by unbiased hit indicators).

    ``literal_order`` uses ``k(1 - u_i, alpha_i)`` instead, which differs by
    the factor ``prod Delta(alpha_i)^2 / Delta(u_i)^2``.
    """
    from .assembler import prefactor_batch, volume_sum_batch

    _check_time(T)
    al = [a if isinstance(a, AngleVector) else standardize(a) for a in alphas]
    n, p = al[0].n, len(al)
    t = T / p
    sigma = 1.3 * math.sqrt(t) / (2 * math.pi)
    seq = np.random.SeedSequence(seed)
    nb = max(1, math.ceil(samples / batch))
    streams = seq.spawn(nb)
    vals = []
    for b in range(nb):
        m = min(batch, samples - b * batch)
        rng = np.random.default_rng(streams[b])
        V, w = [], np.ones(m)
        for i in range(p - 1):
            v, q = _gaussian_proposal(al[i].as_array(), sigma, m, rng)
            V.append(v)
            w /= q
        resid = np.zeros(m)
        U = [_complement_rows(v) for v in V]
        for u in U:
            resid += u.sum(axis=1)
        # 1 - u_p must have |.| = -|u_p| = sum_{i<p} |u_i| mod 1
        free = rng.random((m, n - 1))
        last = np.mod(resid - free.sum(axis=1), 1.0)
        vp = -np.sort(-np.concatenate([free, last[:, None]], axis=1), axis=1)
        V.append(vp)
        U.append(_complement_rows(vp))
        w /= math.factorial(n)
        for i in range(p):
            if literal_order:
                w *= dyson_kernel_batch(t, V[i], np.tile(al[i].as_array(), (m, 1)))
            else:
                w *= dyson_kernel_batch(t, np.tile(al[i].as_array(), (m, 1)), V[i])
        z = volume_sum_batch(spec, n, U, rng) * prefactor_batch(spec, n, U, constant)
        vals.append(w * z)
    vals = np.concatenate(vals)
    return SmoothedEstimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(len(vals))), len(vals), seed)


# ---------------------------------------------------------------------------
# Loop trees
# ---------------------------------------------------------------------------


@dataclass
class LoopTree:
    vertices: Dict[int, Tuple[float, int]]  # id -> (area, genus)
    loops: List[Tuple[int, int, AngleVector]]  # (from, to, alpha)

    def degree(self, v: int) -> int:
        return sum((a == v) + (b == v) for a, b, _ in self.loops)

    def validate(self) -> "LoopTree":
        if not self.vertices:
            raise InvalidTree("empty tree")
        for v, (area, genus) in self.vertices.items():
            if area < 0 or genus < 0:
                raise InvalidTree(f"vertex {v} has negative area or genus")
        for a, b, alpha in self.loops:
            if a not in self.vertices or b not in self.vertices:
                raise InvalidTree(f"loop ({a}, {b}) names an unknown vertex")
            if not alpha.is_regular():
                raise InvalidTree(f"loop ({a}, {b}) label {alpha} is not regular")
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                x = parent[x]
            return x

        for a, b, _ in self.loops:
            parent[find(a)] = find(b)
        if len({find(v) for v in self.vertices}) != 1:
            raise InvalidTree("loop tree is not connected")
        # disjoint simple loops on a connected surface: the quotient graph
        # has first Betti number = number of loops - (V - 1) absorbed as genus
        return self

    def arguments(self, v: int) -> List[AngleVector]:
        """Classes seen from ``v`` in loop order (``1 - alpha`` at the target end)."""
        out = []
        for a, b, alpha in self.loops:
            if a == v:
                out.append(alpha)
            if b == v:
                out.append(complement(alpha))
        return out

    def to_json(self) -> str:
        data = {"vertices": [{"id": v, "area": A, "genus": g} for v, (A, g) in sorted(self.vertices.items())],
                "loops": [{"from": a, "to": b, "alpha": str(al)} for a, b, al in self.loops]}
        return json.dumps(data, indent=1)


def load_loop_tree(text: str) -> LoopTree:
    from .classes import parse_angles

    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidTree(f"line {exc.lineno}: {exc.msg}") from exc
    verts = {}
    for item in data.get("vertices", []):
        vid = int(item["id"])
        if vid in verts:
            raise InvalidTree(f"duplicate vertex id {vid}")
        verts[vid] = (float(item.get("area", 0.0)), int(item.get("genus", 0)))
    loops = []
    for item in data.get("loops", []):
        alpha = item["alpha"]
        alpha = parse_angles(alpha) if isinstance(alpha, str) else standardize(alpha)
        loops.append((int(item["from"]), int(item["to"]), alpha))
    return LoopTree(verts, loops).validate()


@dataclass
class MarginalEstimate:
    value: float
    stderr: float
    factors: List[dict] = field(default_factory=list)


def lattice_scale(g: int, p: int, n: int) -> float:
    """Factor turning a calibrated ``Z_{g,p}`` into the lattice normalization.

    With the triangle constant calibrated on ``(0,3)``, the lattice values
    equal ``n^{2g+p-3} Z_{g,p}``: each tree gluing integrates over a slice of
    fixed ``|u| mod 1`` without producing the ``1/n`` of the prefactor.
    """
    return float(n) ** (2 * g + p - 3)


def vertex_factor(area: float, genus: int, args: Sequence[AngleVector], samples: int, seed: int,
                  constant: Optional[float] = None, normalization: str = "lattice") -> Tuple[float, float, str]:
    """One vertex of a loop tree: ``(value, stderr, route)``.

    Discs and cylinders are evaluated in closed form (lattice normalization);
    other vertices use the honeycomb volumes, flat when the area is 0 and
    heat-kernel smoothed otherwise, rescaled by :func:`lattice_scale` unless
    ``normalization == "volume"``.
    """
    from .assembler import pants_surface, z_gp

    d = len(args)
    if genus == 0 and d == 1:
        if area == 0:
            return 0.0, 0.0, "delta"  # delta at the identity, zero on regular classes
        return disc_z(area, args[0]), 0.0, "disc-series"
    if genus == 0 and d == 2:
        if area == 0:
            raise InvalidTree("zero-area cylinder is a delta function")
        return cylinder_z(area, complement(args[0]), args[1]), 0.0, "cylinder"
    if d == 0:
        raise InvalidTree("a vertex without loops needs the closed-surface series (lattice_oracle_closed)")
    spec = pants_surface(genus, d)
    scale = 1.0 if normalization == "volume" else lattice_scale(genus, d, args[0].n)
    if area == 0:
        est = z_gp(spec, args, samples=samples, seed=seed, constant=constant)
        return float(est.value) * scale, est.stderr * scale, "flat"
    sm = ym_smoothed(spec, area, args, samples=samples, seed=seed, constant=constant)
    return sm.value * scale, sm.stderr * scale, "smoothed"


def ym_marginal(tree: LoopTree, samples: int = 100_000, seed: int = 0, constant: Optional[float] = None,
                normalization: str = "lattice") -> MarginalEstimate:
    """Product over vertices of the smoothed vertex partition functions.

    The classes at a vertex are paired with its loops in listing order
    (``alpha`` at the source end, ``1 - alpha`` at the target end); the
    pairing is reported per factor.
    """
    if normalization not in ("lattice", "volume"):
        raise ValueError(f"unknown normalization {normalization!r}")
    tree.validate()
    value, rel2, factors = 1.0, 0.0, []
    for k, (v, (area, genus)) in enumerate(sorted(tree.vertices.items())):
        args = tree.arguments(v)
        f, err, route = vertex_factor(area, genus, args, samples, seed + k, constant, normalization)
        factors.append({"vertex": v, "area": area, "genus": genus, "degree": len(args),
                        "arguments": [str(a) for a in args], "route": route, "value": f, "stderr": err})
        value *= f
        rel2 += (err / f) ** 2 if f else 0.0
    return MarginalEstimate(value, abs(value) * math.sqrt(rel2), factors)


# ---------------------------------------------------------------------------
# Calibration
# ---------------------------------------------------------------------------

REFERENCE_TRIPLE = ((0.8, 0.45, 0.1), (0.7, 0.4, 0.15), (0.9, 0.5, 0.2))


def calibrate(n: int = 3, T: float = 0.5, triple: Optional[Sequence] = None, samples: int = 1_000_000,
              seed: int = 0) -> dict:
    """Fit the triangle constant so that the smoothed ``Z_{0,3}`` equals the
    lattice value at one reference triple.  Returns the fitted constant, the
    ratio to the default constant and its relative standard error."""
    from .assembler import c03_default, pants_surface

    if triple is None:
        if n != 3:
            raise ValueError("pass a reference triple for n != 3")
        triple = REFERENCE_TRIPLE
    tri = [standardize(a) for a in triple]
    base = c03_default(n)
    sm = ym_smoothed(pants_surface(0, 3), T, tri, samples=samples, seed=seed, constant=base)
    lat = lattice_oracle(0, 3, T, tri)
    ratio = lat / sm.value
    return {"n": n, "T": T, "c03": base * ratio, "ratio": ratio, "rel_stderr": sm.stderr / sm.value,
            "triple": [str(a) for a in tri], "samples": samples, "seed": seed}


# ---------------------------------------------------------------------------
# Orbit product sampler
# ---------------------------------------------------------------------------


def haar_unitary(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed unitaries by QR of complex Ginibre matrices."""
    Z = (rng.standard_normal((size, n, n)) + 1j * rng.standard_normal((size, n, n))) / math.sqrt(2)
    Q, R = np.linalg.qr(Z)
    d = np.diagonal(R, axis1=1, axis2=2)
    return Q * (d / np.abs(d))[:, None, :]


def orbit_product_sampler(alpha, beta, N: int, seed: int = 0, batch: int = 100_000) -> np.ndarray:
    """Classes ``standardize(angles of (U V)^{-1})`` for Haar conjugates
    ``U`` of ``alpha`` and ``V`` of ``beta``; shape ``(N, n)``."""
    a, b = _as_array(alpha), _as_array(beta)
    n = a.size
    streams = np.random.SeedSequence(seed).spawn(max(1, math.ceil(N / batch)))
    out = []
    for i, st in enumerate(streams):
        m = min(batch, N - i * batch)
        rng = np.random.default_rng(st)
        P = haar_unitary(n, m, rng)
        Q = haar_unitary(n, m, rng)
        U = P * np.exp(2j * np.pi * a)[None, None, :] @ np.conj(np.transpose(P, (0, 2, 1)))
        V = Q * np.exp(2j * np.pi * b)[None, None, :] @ np.conj(np.transpose(Q, (0, 2, 1)))
        ev = np.linalg.eigvals(U @ V)
        ang = np.mod(-np.angle(ev) / (2 * np.pi), 1.0)
        out.append(-np.sort(-ang, axis=1))
    return np.concatenate(out)[:N]


def slice_histogram(samples: np.ndarray, bins: int = 20) -> Tuple[np.ndarray, np.ndarray]:
    """Histogram of the first coordinate of the classes: ``(counts, edges)``."""
    counts, edges = np.histogram(samples[:, 0], bins=bins, range=(0.0, 1.0))
    return counts, edges
