import math
from fractions import Fraction as F

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from honeyvol.classes import (AlcovePoint, AngleVector, alcove_embed, alcove_piece, complement, format_angles,
                              hat, parse_angles, shift, slice_mass_mc, slice_sample_batch, standardize, tilde,
                              vandermonde, vandermonde_batch)
from honeyvol.errors import NotRegular

fractions = st.fractions(min_value=0, max_value=F(22, 23), max_denominator=97)


@st.composite
def regular_classes(draw, n=3):
    vals = draw(st.lists(fractions, min_size=n, max_size=n, unique=True))
    return AngleVector(tuple(sorted(vals, reverse=True)))


def test_parse_and_format_round_trip():
    a = parse_angles("14/23,7/23,2/23")
    assert a.exact and a.angles == (F(14, 23), F(7, 23), F(2, 23))
    assert format_angles(a) == "14/23,7/23,2/23"
    assert parse_angles(format_angles(a)) == a


def test_parse_sorts_and_accepts_decimals():
    a = parse_angles("0.3,0.7")
    assert not a.exact and a.angles == (0.7, 0.3)


def test_rejects_out_of_range_and_unsorted():
    with pytest.raises(ValueError):
        AngleVector((1.0, 0.5))
    with pytest.raises(ValueError):
        AngleVector((0.2, 0.5))


def test_regularity_and_residue():
    a = AngleVector((F(1, 2), F(1, 2), F(0)))
    assert not a.is_regular()
    with pytest.raises(NotRegular):
        a.require_regular()
    b = AngleVector((F(2, 3), F(1, 3), F(0)))
    assert b.is_su_regular() and b.residue() == 0


def test_tilde_wraps_zero_entry():
    a = AngleVector((F(1, 2), F(0)))
    assert tilde(a) == AngleVector((F(1, 2), F(0)))


@given(regular_classes())
def test_complement_is_involution(a):
    assert complement(complement(a)) == a
    assert (a.total() + complement(a).total()) % 1 == 0


@given(regular_classes())
def test_hat_has_integral_sum(a):
    h = hat(a)
    assert h.residue() == 0
    assert h.is_regular()


@given(regular_classes(), fractions)
def test_shift_moves_residue(a, t):
    s = shift(a, t)
    assert s.residue() == (a.residue() + a.n * t) % 1


@given(regular_classes(n=4))
def test_vandermonde_batch_matches_scalar(a):
    x = a.as_array()
    assert vandermonde_batch(x[None, :])[0] == pytest.approx(vandermonde(x), rel=1e-12, abs=1e-300)


def test_alcove_embedding_examples():
    t = AlcovePoint((F(1, 3), F(0), F(-1, 3)))
    assert alcove_piece(t) == 1
    assert alcove_embed(t) == AngleVector((F(2, 3), F(1, 3), F(0)))
    assert t.negate().t == (F(1, 3), F(0), F(-1, 3))


@settings(max_examples=50)
@given(st.lists(st.floats(-0.3, 0.3), min_size=2, max_size=2))
def test_alcove_embed_has_integral_sum(free):
    t = sorted(free + [-sum(free)], reverse=True)
    if t[0] - t[-1] >= 1 or min(a - b for a, b in zip(t, t[1:])) < 1e-6:
        return
    t[-1] = -(t[0] + t[1])
    try:
        p = AlcovePoint(tuple(t))
    except ValueError:
        return
    emb = alcove_embed(p)
    assert abs(emb.total() - round(emb.total())) < 1e-12


def test_standardize_reduces_mod_one():
    assert standardize([1.25, -0.5]).angles == (0.5, 0.25)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_slice_mass_is_one_over_factorial(n):
    est, err = slice_mass_mc(0.37, n, 200_000, np.random.default_rng(n))
    assert abs(est - 1 / math.factorial(n)) < 4 * err


def test_slice_batch_has_requested_residue():
    u = slice_sample_batch(0.25, np.random.default_rng(0), 3, 1000)
    assert np.all(np.diff(u, axis=1) < 0)
    r = np.mod(u.sum(axis=1), 1.0)
    assert np.allclose(np.minimum(abs(r - 0.25), 1 - abs(r - 0.25)), 0, atol=1e-12)
