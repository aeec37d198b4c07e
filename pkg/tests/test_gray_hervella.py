import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holotorsion.errors import InvalidStructureError, ParseError
from holotorsion.exact_forms import ONE, ZERO, KForm, Scalar, parse_form
from holotorsion.gray_hervella import (
    CLASS_SUBSETS, AlmostHermitianStructure, TorsionTensor, classify_point, fundamental_form, gh_dimension_formulas,
    lee_form_codifferential, lee_form_from_dw, nijenhuis, parse_matrix, project_classes, projectors, standard_J,
    torsion_tensor, type_21_part, verify_gh_dimensions,
)
from holotorsion.lie_ce import builtin_algebra

IWASAWA = builtin_algebra("iwasawa")
J0 = standard_J(6)
AK = [[0, 0, 0, 0, 0, 1], [0, 0, 0, 0, 1, 0], [0, 0, 0, 1, 0, 0],
      [0, 0, -1, 0, 0, 0], [0, -1, 0, 0, 0, 0], [-1, 0, 0, 0, 0, 0]]
# structures classified in the cross-check sweep
SWEEP = [("abelian:6", J0), ("abelian:6", AK), ("iwasawa", J0), ("iwasawa", AK), ("m6", J0), ("m6", AK),
         ("h5r", J0), ("h5r", AK), ("m6x2", standard_J(8)), ("abelian:4", standard_J(4))]


def ahs(name, J):
    return AlmostHermitianStructure(builtin_algebra(name), J)


# -- structures -------------------------------------------------------------


def test_fundamental_forms():
    assert fundamental_form(ahs("iwasawa", J0)) == parse_form("e{12}+e{34}+e{56}", 6)
    assert fundamental_form(ahs("iwasawa", AK)) == parse_form("e{16}+e{25}+e{34}", 6)


@pytest.mark.parametrize("J", [J0, AK])
def test_fundamental_form_nondegenerate(J):
    w = fundamental_form(ahs("iwasawa", J))
    assert w ** 3


def test_invalid_J_rejected():
    with pytest.raises(InvalidStructureError):
        ahs("iwasawa", [[1 if i == j else 0 for j in range(6)] for i in range(6)])
    with pytest.raises(InvalidStructureError):
        ahs("heisenberg3", [[0, 1, 0], [-1, 0, 0], [0, 0, 0]])
    # skew with J^2 = -1 but scaled: not orthogonal
    two = [[2 * x for x in row] for row in J0]
    with pytest.raises(InvalidStructureError):
        ahs("iwasawa", two)


def test_orientation_flag():
    assert ahs("iwasawa", J0).orientation_compatible
    flipped = [row[:] for row in J0]
    flipped[0][1], flipped[1][0] = -1, 1
    # J0 with the first complex line reversed: w^3 = -6 vol
    assert not ahs("iwasawa", flipped).orientation_compatible


# -- Nijenhuis --------------------------------------------------------------


def test_nijenhuis():
    assert nijenhuis(ahs("abelian:6", AK)) == {}
    assert nijenhuis(ahs("iwasawa", J0)) == {}
    assert nijenhuis(ahs("iwasawa", AK))


# -- torsion tensor ---------------------------------------------------------


@pytest.mark.parametrize("name, J", SWEEP)
def test_torsion_symmetries(name, J):
    a = ahs(name, J)
    T = torsion_tensor(a)
    Jm = a.J
    n = a.spec.dim
    assert all(T.component(i, j, k) == -T.component(i, k, j) for i, j, k in itertools.product(range(n), repeat=3))
    for i, j, k in itertools.product(range(n), repeat=3):
        jj = sum((Jm[j][p] * Jm[k][q] * T.component(i, p, q) for p in range(n) for q in range(n) if Jm[j][p] and Jm[k][q]), ZERO)
        assert jj == -T.component(i, j, k)


def test_abelian_is_kahler():
    rep = project_classes(torsion_tensor(ahs("abelian:6", J0)))
    assert rep.is_kahler
    assert rep.memberships[""]
    assert all(not v for v in rep.norms.values())


def test_bad_tensor_rejected():
    with pytest.raises(InvalidStructureError):
        project_classes(TorsionTensor({(0, 0, 1): ONE}, tuple(tuple(r) for r in standard_J(4))))


# -- projectors -------------------------------------------------------------


def test_dimension_formulas():
    assert gh_dimension_formulas(2) == (0, 4, 0, 4)
    assert gh_dimension_formulas(3) == (2, 16, 12, 6)


@pytest.mark.parametrize("n", [2, 3, 4])
def test_projector_ranks(n):
    r = verify_gh_dimensions(n)
    assert r["ranks"] == r["expected"]
    assert r["total"] == r["dim_W"] == 2 * n * n * (n - 1)
    assert r["idempotent"] and r["orthogonal"] and r["complete"]


def test_dimension_guard():
    with pytest.raises(ValueError):
        verify_gh_dimensions(1)
    with pytest.raises(ValueError):
        verify_gh_dimensions(6)


def test_w1_is_totally_skew():
    # a totally skew element of W in real dimension 6: Re of a (3,0)-form, read as F(X,Y,Z)
    P = projectors(J0)
    psi = parse_form("e{135}-e{146}-e{236}-e{245}", 6)
    t = {}
    for (i, j, k), c in psi.terms.items():
        for perm in itertools.permutations((i - 1, j - 1, k - 1)):
            sign = 1 if perm in ((i - 1, j - 1, k - 1), (j - 1, k - 1, i - 1), (k - 1, i - 1, j - 1)) else -1
            t[perm] = c * sign
    F1, F2, F3, F4 = P(t)
    assert F1 == t and not F2 and not F3 and not F4


# -- classification ---------------------------------------------------------


def test_iwasawa_J0_is_w3():
    rep = classify_point(IWASAWA, J0)
    assert rep.minimal_class == "3"
    assert rep.norms[3] == 8 and not rep.norms[1] and not rep.norms[2] and not rep.norms[4]
    assert not rep.lee_form
    assert rep.flags["hermitian_nijenhuis"] and rep.flags["hermitian_projection"]


def test_iwasawa_almost_kahler_is_w2():
    rep = classify_point(IWASAWA, AK)
    assert not rep.extras["dw"]
    assert rep.minimal_class == "2"
    assert rep.flags["symplectic_dw"] and rep.flags["quasi_kahler_projection"]
    assert not rep.flags["hermitian_nijenhuis"]


def test_h5r_is_locally_conformally_kahler():
    rep = classify_point(builtin_algebra("h5r"), J0)
    assert rep.minimal_class == "4"
    assert rep.lee_form == KForm.basis(6, 6)
    assert rep.flags["dw_equals_theta_wedge_w"]


@pytest.mark.parametrize("name, J", SWEEP)
def test_cross_checks_agree(name, J):
    rep = classify_point(builtin_algebra(name), J)
    assert rep.flags["consistent"]
    assert rep.total_norm == sum(rep.norms.values(), ZERO)
    assert rep.flags["hermitian_nijenhuis"] == rep.flags["hermitian_projection"]
    assert rep.flags["quasi_kahler_dw"] == rep.flags["quasi_kahler_projection"]
    assert set(rep.memberships) == set(CLASS_SUBSETS)
    assert rep.memberships["1234"]
    assert rep.memberships[rep.minimal_class]


def test_m6_report():
    rep = classify_point(builtin_algebra("m6"), J0)
    assert rep.flags["consistent"]
    assert set(rep.norms) == {1, 2, 3, 4}


def test_lee_routes():
    spec = builtin_algebra("h5r")
    w = parse_form("e{12}+e{34}+e{56}", 6)
    theta = lee_form_from_dw(spec.d(w), w, 3)
    assert theta == KForm.basis(6, 6)
    assert lee_form_codifferential(spec, J0) == theta


def test_type_21_projector():
    # for J0 on R^6, Re(dz1 dz2 dz3) has type (3,0)+(0,3) and e^{135}+... mixes
    pure = parse_form("e{135}-e{146}-e{236}-e{245}", 6)
    assert not type_21_part(pure, J0)
    mixed = parse_form("e{125}", 6)
    assert type_21_part(mixed, J0) == mixed
    g = parse_form("e{135}+e{125}", 6)
    assert type_21_part(type_21_part(g, J0), J0) == type_21_part(g, J0)


# -- matrix files -----------------------------------------------------------


def test_parse_matrix():
    text = "# J0 on R^4\n0 1 0 0\n-1 0 0 0\n0 0 0 1\n0 0 -1 0\n"
    assert parse_matrix(text) == [[Scalar(x) for x in r] for r in [[0, 1, 0, 0], [-1, 0, 0, 0], [0, 0, 0, 1], [0, 0, -1, 0]]]
    m = parse_matrix("1/2, 1/2 s3\n-1/2 s3, 1/2\n")
    assert m[0][1] == Scalar(0, 1) / 2


@pytest.mark.parametrize("text", ["0 1\n-1\n", "0 x\n1 0\n", ""])
def test_parse_matrix_errors(text):
    with pytest.raises(ParseError):
        parse_matrix(text)


@settings(max_examples=10, deadline=None)
@given(st.permutations(range(6)), st.lists(st.sampled_from([1, -1]), min_size=3, max_size=3))
def test_random_pairings_classify_consistently(perm, signs):
    # J e_a = +-e_b along a random perfect matching of the frame
    J = [[0] * 6 for _ in range(6)]
    for s, (a, b) in zip(signs, zip(perm[0::2], perm[1::2])):
        J[a][b], J[b][a] = s, -s
    for name in ("iwasawa", "m6", "h5r"):
        rep = classify_point(builtin_algebra(name), J)
        assert rep.flags["consistent"]
        assert rep.total_norm == sum(rep.norms.values(), ZERO)
