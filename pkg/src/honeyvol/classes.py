"""Conjugacy classes of U(n) as sorted angle vectors.

Angles are measured in turns (a class is the multiset of eigenvalue phases
``exp(2*pi*i*theta_j)``).  A class is stored as a weakly decreasing tuple of
numbers in [0, 1).  Two numeric backends coexist: exact rationals
(:class:`fractions.Fraction`) for combinatorial feasibility and exact volumes,
and binary floats for Monte Carlo and kernel evaluation.  Conversion between
the two is explicit.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateBoundary, NotRegular

#: Minimum pairwise gap (turns) for a float vector to count as regular.
EPS_REG = 1e-9


def _is_exact(values: Iterable) -> bool:
    return all(isinstance(v, (Fraction, int)) and not isinstance(v, bool) for v in values)


def _mod1(x):
    if isinstance(x, (Fraction, int)):
        return Fraction(x) % 1
    r = math.fmod(float(x), 1.0)
    if r < 0:
        r += 1.0
    if r >= 1.0:  # fmod of a tiny negative number can round up to 1
        r = 0.0
    return r


@dataclass(frozen=True)
class AngleVector:
    """A conjugacy class: ``n`` angles in [0, 1), weakly decreasing."""

    angles: tuple

    def __post_init__(self):
        a = tuple(self.angles)
        object.__setattr__(self, "angles", a)
        for x in a:
            if not (0 <= x < 1):
                raise ValueError(f"angle {x} outside [0, 1)")
        for x, y in zip(a, a[1:]):
            if x < y:
                raise ValueError(f"angles not weakly decreasing: {a}")

    # -- basic accessors -------------------------------------------------
    def __len__(self):
        return len(self.angles)

    def __iter__(self):
        return iter(self.angles)

    def __getitem__(self, i):
        return self.angles[i]

    @property
    def n(self) -> int:
        return len(self.angles)

    @property
    def exact(self) -> bool:
        return _is_exact(self.angles)

    def total(self):
        """Coordinate sum ``|theta|``."""
        return sum(self.angles, Fraction(0) if self.exact else 0.0)

    def residue(self):
        """``t(theta) = |theta| mod 1``."""
        return _mod1(self.total())

    def min_gap(self):
        if self.n < 2:
            return math.inf
        return min(x - y for x, y in zip(self.angles, self.angles[1:]))

    def is_regular(self) -> bool:
        """Strictly decreasing (float mode: gaps at least ``EPS_REG``)."""
        if self.n < 2:
            return True
        gap = self.min_gap()
        return gap > 0 if self.exact else gap >= EPS_REG

    def is_su_regular(self) -> bool:
        """Regular with integral coordinate sum."""
        if not self.is_regular():
            return False
        r = self.residue()
        if self.exact:
            return r == 0
        return min(r, 1 - r) < 1e-12

    def require_regular(self) -> "AngleVector":
        if not self.is_regular():
            raise NotRegular(f"class {self} is not regular")
        return self

    # -- conversions -----------------------------------------------------
    def to_float(self) -> "AngleVector":
        return AngleVector(tuple(float(x) for x in self.angles))

    def to_exact(self, max_denominator: int | None = None) -> "AngleVector":
        if max_denominator is None:
            vals = tuple(Fraction(x) for x in self.angles)
        else:
            vals = tuple(Fraction(x).limit_denominator(max_denominator) for x in self.angles)
        return AngleVector(vals)

    def as_array(self) -> np.ndarray:
        return np.array([float(x) for x in self.angles])

    def __str__(self):
        return format_angles(self)


def parse_angles(text: str) -> AngleVector:
    """Parse ``"14/23,7/23,2/23"`` (rationals or decimals) into a class.

    Rationals stay exact; decimals are read as floats.  The entries are
    standardized (reduced mod 1 and sorted), so any order is accepted.
    """
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("empty angle vector")
    vals = []
    for p in parts:
        if "/" in p or p.lstrip("-").isdigit():
            vals.append(Fraction(p))
        else:
            vals.append(float(p))
    if any(isinstance(v, float) for v in vals):
        vals = [float(v) for v in vals]
    return standardize(vals)


def format_angles(theta: AngleVector) -> str:
    out = []
    for x in theta.angles:
        if isinstance(x, Fraction):
            out.append(f"{x.numerator}/{x.denominator}" if x.denominator != 1 else str(x.numerator))
        else:
            out.append(repr(float(x)))
    return ",".join(out)


def standardize(v: Sequence) -> AngleVector:
    """Reduce every entry mod 1 and sort decreasingly."""
    vals = [_mod1(x) for x in v]
    if not _is_exact(vals):
        vals = [float(x) for x in vals]
    return AngleVector(tuple(sorted(vals, reverse=True)))


def vandermonde(theta) -> float:
    """``2^{n(n-1)/2} prod_{i<j} sin(pi (x_i - x_j))``; nonnegative on sorted input."""
    x = np.asarray([float(t) for t in theta], dtype=float)
    n = len(x)
    diff = x[:, None] - x[None, :]
    iu = np.triu_indices(n, 1)
    return float(2.0 ** (n * (n - 1) / 2) * np.prod(np.sin(np.pi * diff[iu])))


def vandermonde_batch(x: np.ndarray) -> np.ndarray:
    """Row-wise :func:`vandermonde` for an ``(m, n)`` array."""
    x = np.asarray(x, dtype=float)
    n = x.shape[-1]
    out = np.full(x.shape[:-1], 2.0 ** (n * (n - 1) / 2))
    for i in range(n):
        for j in range(i + 1, n):
            out = out * np.sin(np.pi * (x[..., i] - x[..., j]))
    return out


def tilde(theta: AngleVector, strict: bool = False) -> AngleVector:
    """``(1 - theta_n, ..., 1 - theta_1)``.

    When ``theta_n == 0`` the raw formula produces 1; the result is reduced
    mod 1 and re-sorted, unless ``strict`` is set, in which case
    :class:`DegenerateBoundary` is raised.
    """
    if theta.angles[-1] == 0:
        if strict:
            raise DegenerateBoundary(f"tilde of {theta} leaves [0, 1)")
        return standardize([1 - x for x in theta.angles])
    return AngleVector(tuple(1 - x for x in reversed(theta.angles)))


def complement(theta: AngleVector) -> AngleVector:
    """Entrywise ``1 - theta`` standardized (the class of the inverse matrix)."""
    return standardize([1 - x for x in theta.angles])


def shift(theta: AngleVector, t) -> AngleVector:
    """Circle action: add ``t`` to every angle and standardize."""
    return standardize([x + t for x in theta.angles])


def hat(theta: AngleVector) -> AngleVector:
    """Shift by ``-t(theta)/n`` so that the coordinate sum becomes integral."""
    theta.require_regular()
    r = theta.residue()
    if r == 0:
        return theta
    out = shift(theta, -r / theta.n)
    if not out.is_regular():
        raise DegenerateBoundary(f"hat({theta}) produced a tie")
    return out


# ---------------------------------------------------------------------------
# Alcove parametrization of SU(n) classes
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class AlcovePoint:
    """Weakly decreasing ``t`` with zero sum and ``t_1 - t_n <= 1``."""

    t: tuple

    def __post_init__(self):
        t = tuple(self.t)
        object.__setattr__(self, "t", t)
        s = sum(t)
        tol = 0 if _is_exact(t) else 1e-12
        if abs(s) > tol:
            raise ValueError(f"alcove point must have zero sum, got {s}")
        if any(a < b for a, b in zip(t, t[1:])):
            raise ValueError("alcove point must be weakly decreasing")
        if t[0] - t[-1] > 1 + tol:
            raise ValueError("alcove point must satisfy t_1 - t_n <= 1")

    @property
    def n(self):
        return len(self.t)

    def is_regular(self) -> bool:
        t = self.t
        gap = min(a - b for a, b in zip(t, t[1:]))
        span = t[0] - t[-1]
        if _is_exact(t):
            return gap > 0 and span < 1
        return gap >= EPS_REG and span <= 1 - EPS_REG

    def negate(self) -> "AlcovePoint":
        """``-t`` reordered decreasingly: ``(-t_n, ..., -t_1)``."""
        return AlcovePoint(tuple(-x for x in reversed(self.t)))


def alcove_piece(t: AlcovePoint) -> int:
    """Number ``i`` of strictly positive entries (selects the affine piece)."""
    return sum(1 for x in t.t if x > 0)


def alcove_embed(t: AlcovePoint) -> AngleVector:
    """``(1 + t_{i+1}, ..., 1 + t_n, t_1, ..., t_i)`` with ``i`` positive entries."""
    if not t.is_regular():
        raise NotRegular(f"alcove point {t.t} is not regular")
    i = alcove_piece(t)
    raw = [1 + x for x in t.t[i:]] + list(t.t[:i])
    return standardize(raw)


def alcove_piece_matrix(i: int, n: int) -> np.ndarray:
    """Linear part of the ``i``-th piece in free coordinates.

    Inputs are ``(t_1..t_{n-1})`` (``t_n = -sum``), outputs are the first
    ``n - 1`` entries of the embedded vector before standardization.
    """
    # full linear map R^{n-1} -> R^n for t, then permutation, then drop last
    lift = np.vstack([np.eye(n - 1), -np.ones((1, n - 1))])  # t in terms of free coords
    order = list(range(i, n)) + list(range(0, i))
    perm = lift[order]
    return perm[: n - 1]


# ---------------------------------------------------------------------------
# Slices of fixed determinant
# ---------------------------------------------------------------------------


def slice_sample(residue, rng: np.random.Generator, n: int, max_tries: int = 1000):
    """Draw a point of ``{u regular : |u| = residue mod 1}``.

    Returns ``(u, weight)`` with the constant weight ``1/n!``: the average of
    ``f(u) * weight`` over draws estimates the integral of ``f`` over the slice
    against its natural Lebesgue measure (whose total mass is ``1/n!``).
    """
    if n < 2:
        raise ValueError("slice sampling needs n >= 2")
    r = float(residue)
    for _ in range(max_tries):
        free = rng.random(n - 1)
        last = (r - free.sum()) % 1.0
        u = standardize(list(free) + [last])
        if u.is_regular():
            return u, 1.0 / math.factorial(n)
    raise NotRegular("could not draw a regular point")  # pragma: no cover


def slice_sample_batch(residue, rng: np.random.Generator, n: int, size: int) -> np.ndarray:
    """Vectorized :func:`slice_sample`; rows sorted decreasingly.

    Non-regular rows (measure zero) are redrawn.  The weight is ``1/n!``.
    """
    r = float(residue)
    free = rng.random((size, n - 1))
    last = np.mod(r - free.sum(axis=1), 1.0)
    u = np.concatenate([free, last[:, None]], axis=1)
    u = -np.sort(-u, axis=1)
    bad = np.min(u[:, :-1] - u[:, 1:], axis=1) < EPS_REG if n > 1 else np.zeros(size, bool)
    if bad.any():
        u[bad] = slice_sample_batch(r, rng, n, int(bad.sum()))
    return u


def slice_mass_mc(residue, n: int, samples: int, rng: np.random.Generator):
    """Hit-or-miss estimate of the total mass of the slice, with stderr.

    Independent of :func:`slice_sample`: draws ordered coordinates
    ``u_1..u_{n-1}`` uniformly, completes ``u_n`` from the residue, and counts
    the strictly decreasing tuples.
    """
    r = float(residue)
    free = rng.random((samples, n - 1))
    last = np.mod(r - free.sum(axis=1), 1.0)
    u = np.concatenate([free, last[:, None]], axis=1)
    hits = np.all(u[:, :-1] > u[:, 1:], axis=1)
    p = hits.mean()
    return float(p), float(math.sqrt(p * (1 - p) / samples))
