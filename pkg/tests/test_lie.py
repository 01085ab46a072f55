import pytest
import sympy as sp
from hypothesis import given, settings, strategies as st

from gburgers.lie import (
    BASIS, DT, DX, GAL, LEVI_FACTOR, NILRADICAL, PI, PT, PX, RADICAL, NotInAlgebra, Subalgebra,
    VectorField, bracket, bracket_coords, check_levi, parse_field, structure_invariants,
)
from gburgers.expr import t, u, x

# the nonzero commutators; every other pair of basis elements commutes
KNOWN_BRACKETS = {
    (PT, DT): PT,
    (DT, PI): PI,
    (PT, PI): 2 * DT + DX,
    (PX, DX): PX,
    (PX, PI): GAL,
    (PT, GAL): PX,
    (DT, GAL): GAL,
    (GAL, DX): GAL,
}


def test_nonzero_commutators():
    for (a, b), expected in KNOWN_BRACKETS.items():
        assert bracket(a, b) == expected
        assert bracket(b, a) == -expected


def test_remaining_commutators_vanish():
    listed = {(a, b) for a, b in KNOWN_BRACKETS} | {(b, a) for a, b in KNOWN_BRACKETS}
    for a in BASIS:
        for b in BASIS:
            if (a, b) not in listed:
                assert bracket(a, b).is_zero(), (a, b)


def test_realisation_components():
    assert PI.components() == (t**2, t * x, x - t * u)
    assert DT.components() == (t, 0, -u)
    assert VectorField.from_components(t, 1, -u) == PX + DT


def test_from_components_rejects_foreign_fields():
    with pytest.raises(NotInAlgebra):
        VectorField.from_components(x, 0, 0)


small = st.integers(-3, 3)
fields = st.tuples(small, small, small, small, small, small).map(VectorField)


@settings(max_examples=40, deadline=None)
@given(fields, fields)
def test_fast_bracket_matches_components(X, Y):
    assert bracket_coords(X, Y) == bracket(X, Y)


@settings(max_examples=25, deadline=None)
@given(fields, fields, fields)
def test_jacobi(X, Y, Z):
    total = (bracket_coords(X, bracket_coords(Y, Z)) + bracket_coords(Y, bracket_coords(Z, X))
             + bracket_coords(Z, bracket_coords(X, Y)))
    assert total.is_zero()


def test_levi_decomposition():
    failed = [c.relation for c in check_levi() if not c.passed]
    assert failed == []


def test_structure_invariants_of_named_subalgebras():
    assert structure_invariants(RADICAL) == (3, 3, 2, 0, 1)
    assert structure_invariants(NILRADICAL) == (2, 2, 2, 0, 0)
    assert structure_invariants(LEVI_FACTOR) == (3, 0, 0, 3, 0)
    assert structure_invariants(Subalgebra.span(BASIS)).dim == 6


def test_span_is_canonical():
    a = Subalgebra.span([PT + PX, PX])
    b = Subalgebra.span([PT, 2 * PX])
    assert a == b
    assert a.contains(PT - 3 * PX)
    assert not a.contains(DT)


def test_parse_field():
    assert parse_field("P^t + 1/2*D^x") == PT + sp.Rational(1, 2) * DX
    assert parse_field("D^t - 2*G") == DT - 2 * GAL
    assert parse_field("-Pi") == -PI


def test_signatures_of_listed_algebras():
    from gburgers.classify import CASES
    assert structure_invariants(CASES["5"].span()) == (5, 2, 2, 3, 0)
    assert structure_invariants(Subalgebra.span([DX])) == (1, 1, 0, 0, 1)
    # D^t + P^x has D^x component -1/2 after splitting off D^t + D^x/2, so the
    # projection onto the span of D^x is one-dimensional
    assert structure_invariants(CASES["2.5"].span()) == (2, 0, 0, 2, 1)


def test_bracket_examples():
    assert bracket(PT, DT + DX / 2) == PT
    assert bracket(PX, GAL).is_zero()
    assert bracket(DX, PX) == -PX
    assert bracket(PT, PX).is_zero()
