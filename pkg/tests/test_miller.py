import math
from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from millerlatent.errors import AllParallel, NonRationalIntercepts, NotationError, ZeroIndex
from millerlatent.miller import (
    MillerIndex,
    Intercepts,
    canonicalize,
    enumerate_families,
    family_of,
    format_family,
    format_index,
    from_intercepts,
    intercepts_of,
    parse_components,
    parse_family,
    parse_index,
    signed_permutations,
)

from oracles import brute_force_family

triples = st.tuples(*[st.integers(-6, 6)] * 3).filter(any)


def test_intercepts_face_plane():
    assert from_intercepts(Intercepts(1, math.inf, math.inf)) == MillerIndex(1, 0, 0)


def test_intercepts_equal_on_all_axes():
    assert from_intercepts((1, 1, 1)) == MillerIndex(1, 1, 1)


def test_intercepts_fractional():
    assert from_intercepts((Fraction(1, 2), 1, math.inf)) == MillerIndex(2, 1, 0)
    assert from_intercepts((0.5, 1 / 3, math.inf)) == MillerIndex(2, 3, 0)


def test_intercepts_errors():
    with pytest.raises(AllParallel):
        from_intercepts((math.inf, math.inf, math.inf))
    with pytest.raises(ValueError):
        from_intercepts((1, -1, math.inf))
    with pytest.raises(NonRationalIntercepts):
        from_intercepts((math.pi, 1, 1), max_denominator=8)


@given(st.tuples(*[st.integers(0, 6)] * 3).filter(any))
def test_intercepts_round_trip(t):
    m = canonicalize(t)
    assert from_intercepts(intercepts_of(m)) == m


@given(triples)
def test_canonical_form(t):
    m = canonicalize(t)
    assert math.gcd(math.gcd(abs(m.h), abs(m.k)), abs(m.l)) == 1
    assert next(c for c in m if c) > 0
    assert canonicalize([-c for c in t]) == m
    assert canonicalize(m) == m and m.is_canonical()


def test_zero_index():
    with pytest.raises(ZeroIndex):
        canonicalize((0, 0, 0))


def test_signed_permutations_form_group():
    ops = signed_permutations()
    assert ops.shape == (48, 3, 3)
    keys = {tuple(o.astype(int).ravel()) for o in ops}
    assert len(keys) == 48
    for a in ops[::7]:
        for b in ops[::5]:
            assert tuple((a @ b).astype(int).ravel()) in keys


@pytest.mark.parametrize("hkl,size", [((1, 0, 0), 3), ((1, 1, 0), 6), ((1, 1, 1), 4), ((1, 1, 2), 12)])
def test_family_sizes(hkl, size):
    fam = family_of(hkl)
    assert len(fam) == size
    assert fam.members == {canonicalize(v) for v in brute_force_family(hkl)}


@given(triples)
def test_family_matches_brute_force(t):
    assert family_of(t).members == {canonicalize(v) for v in brute_force_family(t)}


@given(triples)
def test_family_is_orbit_invariant(t):
    fam = family_of(t)
    for m in fam.members:
        assert family_of(m) == fam


def test_enumerate_families_order():
    fams = enumerate_families(2)
    assert [format_family(f) for f in fams] == ["{100}", "{110}", "{111}", "{210}", "{211}", "{221}"]
    assert len(enumerate_families(3)) == 6 + 7


def test_formatting():
    assert format_index((1, -1, 0)) == "(1-10)"
    assert format_index((10, 1, 0)) == "(10,1,0)"
    assert str(family_of((1, 1, 2))) == "{211}"


@pytest.mark.parametrize(
    "text,expected",
    [("(100)", (1, 0, 0)), ("(1-10)", (1, -1, 0)), ("(1,-1,0)", (1, -1, 0)), ("{111}", (1, 1, 1)),
     ("(-1 0 0)", (1, 0, 0)), ("(1̄ 1 0)", (1, -1, 0)), ("(1̄10)", (1, -1, 0)), ("(2 2 0)", (1, 1, 0))],
)
def test_parse_index(text, expected):
    assert parse_index(text) == expected


def test_parse_components_keeps_sign():
    assert parse_components("(-2 0 0)") == (-2, 0, 0)


@pytest.mark.parametrize("bad", ["100", "(10)", "(1x0)", "(000)", "(1,2)"])
def test_parse_rejects(bad):
    with pytest.raises(NotationError):
        parse_index(bad)


def test_parse_family():
    assert parse_family("{112}") == family_of((2, 1, 1))
    assert (1, -1, 0) in parse_family("{110}")
