from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holotorsion.canonical_structures import StructureKind, build, theorem_substitution
from holotorsion.errors import DimensionMismatch, ParseError, SingularMatrixError
from holotorsion.exact_forms import (
    ONE, S3, ZERO, CoframeChange, KForm, Scalar, contract, hodge_star, parse_form, parse_scalar, substitute, wedge,
)

from strategies import forms, scalars


def e(dim, *idx, c=1):
    return KForm.basis(dim, *idx, coeff=c)


# -- scalars ----------------------------------------------------------------


def test_scalar_literals():
    assert parse_scalar("3/6") == Scalar(Fraction(1, 2))
    assert parse_scalar("-2/3+1/5 s3") == Scalar(Fraction(-2, 3), Fraction(1, 5))
    assert parse_scalar("1 s3") == S3
    assert parse_scalar("-4 s3") == Scalar(0, -4)
    with pytest.raises(ParseError):
        parse_scalar("1.5")
    with pytest.raises(ParseError):
        parse_scalar("1/0")


def test_scalar_roundtrip_and_str():
    x = Scalar(Fraction(-7, 3), Fraction(2, 9))
    assert parse_scalar(x.to_literal()) == x
    assert str(x) == "-7/3+2/9√3"
    assert str(Scalar(5)) == "5"


def test_sqrt3_squares_to_three():
    assert S3 * S3 == 3
    assert (S3 + 1) * (S3 - 1) == 2


def test_sign_is_exact():
    assert Scalar(-1732, 1000).sign() == 1  # sqrt3 > 1.732
    assert Scalar(-1733, 1000).sign() == -1
    assert Scalar(0).sign() == 0


@given(scalars, scalars, scalars)
def test_field_axioms(x, y, z):
    assert x + y == y + x
    assert x * y == y * x
    assert (x + y) + z == x + (y + z)
    assert (x * y) * z == x * (y * z)
    assert x * (y + z) == x * y + x * z
    assert x - x == ZERO
    if x:
        assert x * x.inverse() == ONE
        assert (y / x) * x == y


@given(scalars)
def test_norm_and_zero(x):
    assert x * x.conjugate() == Scalar(x.norm())
    assert (not x) == (x.a == 0 and x.b == 0)


def test_floats_rejected():
    with pytest.raises(TypeError):
        KForm.basis(3, 1) * 0.5


# -- wedge ------------------------------------------------------------------


def test_wedge_basics():
    assert wedge(e(4, 1), e(4, 2)) == e(4, 1, 2)
    assert not wedge(e(4, 1), e(4, 1))
    assert wedge(e(4, 2), e(4, 1)) == -e(4, 1, 2)
    assert not wedge(e(3, 1, 2), e(3, 2, 3))


def test_sigma_squared():
    sigma = build(StructureKind.SIGMA)
    assert sigma ^ sigma == parse_form("-2*e{1234}-2*e{1256}+2*e{3456}", 6)


def test_tau_kills_alpha_and_beta():
    tau = build(StructureKind.TAU)
    assert not wedge(tau, build(StructureKind.ALPHA))
    assert not wedge(tau, build(StructureKind.BETA))


def test_wedge_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        wedge(e(3, 1), e(4, 1))


@settings(max_examples=60)
@given(forms(5), forms(5))
def test_graded_commutativity(f, g):
    assert wedge(f, g) == wedge(g, f) * (-1) ** (f.degree * g.degree)


@settings(max_examples=40)
@given(forms(5), forms(5), forms(5))
def test_wedge_associative(f, g, h):
    assert wedge(wedge(f, g), h) == wedge(f, wedge(g, h))


# -- Hodge star ---------------------------------------------------------------


def test_star_of_one_is_volume():
    assert hodge_star(KForm.one(5)) == KForm.volume(5)


def test_star_in_dim7():
    assert hodge_star(e(7, 5, 6, 7)) == e(7, 1, 2, 3, 4)


def test_g2_norm():
    phi = build(StructureKind.G2_THREE_FORM)
    assert phi ^ hodge_star(phi) == KForm.volume(7) * 7


def test_orientation_flips_star():
    f = e(4, 1, 3)
    assert hodge_star(f, -1) == -hodge_star(f)


@settings(max_examples=60)
@given(st.integers(1, 6).flatmap(lambda n: forms(n)))
def test_star_star(f):
    n, k = f.dim, f.degree
    assert hodge_star(hodge_star(f)) == f * (-1) ** (k * (n - k))


@settings(max_examples=40)
@given(forms(5, 2))
def test_star_pairing_is_norm(f):
    norm = sum((c * c for c in f.terms.values()), ZERO)
    assert wedge(f, hodge_star(f)) == KForm.volume(5) * norm


# -- contraction ------------------------------------------------------------


def test_contract_examples():
    assert contract(1, e(2, 1, 2)) == e(2, 2)
    assert not contract(3, e(3, 1, 2))
    assert contract(2, build(StructureKind.SIGMA)) == e(6, 1)
    assert not contract(1, KForm.one(3))


@settings(max_examples=60)
@given(forms(5), st.integers(1, 5))
def test_contract_twice_vanishes(f, j):
    assert not contract(j, contract(j, f))


@settings(max_examples=60)
@given(forms(5), forms(5), st.integers(1, 5))
def test_contract_antiderivation(f, g, j):
    lhs = contract(j, wedge(f, g))
    rhs = wedge(contract(j, f), g) + wedge(f, contract(j, g)) * (-1) ** f.degree
    assert lhs == rhs


# -- substitution -----------------------------------------------------------


def test_identity_substitution():
    alpha = build(StructureKind.ALPHA)
    assert substitute(alpha, CoframeChange.identity(6)) == alpha


def test_theorem_substitution_effect():
    sub = theorem_substitution(6)
    alpha, tau = build(StructureKind.ALPHA), build(StructureKind.TAU)
    expected = alpha + parse_form("-9*e{245}-3 s3*e{145}+3 s3*e{235}", 6)
    assert substitute(alpha, sub) == expected
    assert substitute(tau, sub) == tau


def test_singular_change_rejected():
    with pytest.raises(SingularMatrixError):
        CoframeChange([[1, 1], [2, 2]])


def _changes(n):
    row = st.lists(st.integers(-2, 2), min_size=n, max_size=n)
    mats = st.lists(row, min_size=n, max_size=n)

    def ok(m):
        try:
            CoframeChange(m)
        except SingularMatrixError:
            return False
        return True

    return mats.filter(ok).map(CoframeChange)


@settings(max_examples=30)
@given(forms(4), _changes(4), _changes(4))
def test_substitution_composes(f, A, B):
    assert substitute(substitute(f, A), B) == substitute(f, A.compose(B))


@settings(max_examples=30)
@given(forms(4), forms(4), _changes(4))
def test_substitution_multiplicative(f, g, A):
    assert substitute(wedge(f, g), A) == wedge(substitute(f, A), substitute(g, A))


# -- literals ---------------------------------------------------------------


def test_form_literal_grammar():
    sigma = parse_form("-1*e{12}+1*e{34}+1*e{56}", 6)
    assert sigma == build(StructureKind.SIGMA)
    assert parse_form("(1/2+1/3 s3)*e{1 10}", 10) == e(10, 1, 10, c=Scalar(Fraction(1, 2), Fraction(1, 3)))
    assert parse_form("e{21}", 2) == -e(2, 1, 2)
    assert not parse_form("e{12}-e{12}", 2)


@pytest.mark.parametrize("text", ["e{12}+", "e{12}e{34}", "2*e{1x}", "e{19}"])
def test_form_literal_errors(text):
    with pytest.raises(ParseError):
        parse_form(text, 4)


@settings(max_examples=60)
@given(forms(6, coeffs=scalars))
def test_literal_roundtrip(f):
    assert parse_form(f.to_literal(), 6, f.degree) == f
