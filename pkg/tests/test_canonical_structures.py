import time

import pytest

from holotorsion.canonical_structures import (
    StructureKind, build, classify_g2, closed_monomial_census, complex_volume_pair, g2_type_from_derivatives,
    non_parallel_witness, theorem7_verify, theorem_substitution, verify_reduction_minus, verify_reduction_plus,
)
from holotorsion.errors import DimensionMismatch
from holotorsion.exact_forms import KForm, Scalar, hodge_star, parse_form, substitute, wedge
from holotorsion.lie_ce import builtin_algebra


def f(text, dim):
    return parse_form(text, dim)


# -- literal forms ----------------------------------------------------------


@pytest.mark.parametrize("kind", list(StructureKind))
def test_dimensions(kind):
    built = build(kind)
    forms = built if isinstance(built, tuple) else (built,)
    assert all(x.dim == kind.dim for x in forms)


def test_printed_forms():
    assert build(StructureKind.SIGMA) == f("-e{12}+e{34}+e{56}", 6)
    assert build("tau") == f("e{12}+e{34}+e{56}", 6)
    assert build(StructureKind.ALPHA) == f("3*e{135}+e{146}+e{236}+e{245}", 6)
    assert build(StructureKind.BETA) == f("3*e{246}+e{235}+e{136}+e{145}", 6)
    assert build(StructureKind.G2_THREE_FORM) == f("e{125}-e{345}+e{136}-e{426}+e{147}-e{237}+e{567}", 7)
    w1, w2, w3 = build(StructureKind.QUATERNION_TRIPLE)
    assert w1 == f("e{13}+e{57}+e{24}+e{68}", 8)


def test_omega_plus_is_sum_of_squares():
    w1, w2, w3 = build(StructureKind.QUATERNION_TRIPLE)
    assert build(StructureKind.OMEGA_PLUS) == (w1 ^ w1) + (w2 ^ w2) + (w3 ^ w3)
    assert build(StructureKind.OMEGA_MINUS) == (w1 ^ w1) + (w2 ^ w2) - (w3 ^ w3)


def test_omega_plus_is_nondegenerate():
    om = build(StructureKind.OMEGA_PLUS)
    assert (om ^ om).coefficient(*range(1, 9)) != 0


# -- reductions -------------------------------------------------------------


def test_reduction_identities():
    assert verify_reduction_minus()
    assert verify_reduction_plus()


def test_side_conditions():
    phi, psi = complex_volume_pair()
    sigma, tau = build(StructureKind.SIGMA), build(StructureKind.TAU)
    assert not wedge(sigma, phi) and not wedge(sigma, psi)
    assert not wedge(tau, build(StructureKind.ALPHA)) and not wedge(tau, build(StructureKind.BETA))
    assert all(not v for v in verify_reduction_minus().side_conditions.values())


def test_complex_volume_pair():
    phi, psi = complex_volume_pair()
    assert phi == f("e{135}-e{146}+e{236}+e{245}", 6)
    assert psi == f("e{136}+e{145}-e{235}+e{246}", 6)


def test_literal_complex_product_fails():
    # (e1+ie2)(e3+ie4)(e5+ie6) taken literally does not satisfy the Omega_- reduction
    phi, psi = complex_volume_pair(conjugate_first=False)
    check = verify_reduction_minus(phi=phi, psi=psi)
    assert not check
    assert check.residue == f("-2*e{2358}+2*e{2367}+2*e{2457}+2*e{2468}", 8)


def test_falsification_controls():
    phi, psi = complex_volume_pair()
    bad = verify_reduction_minus(phi=phi + f("e{135}", 6))
    assert not bad and bad.residue
    assert not verify_reduction_plus(tau_sq_sign=+1)


# -- theorem ---------------------------------------------------------------


def test_census():
    census = closed_monomial_census()
    assert len(census) == 8
    assert [k for k, closed in census.items() if not closed] == ["e{246}"]


def test_substitution_effect():
    sub = theorem_substitution(6)
    alpha, beta = build(StructureKind.ALPHA), build(StructureKind.BETA)
    s3 = Scalar(0, 1)
    assert substitute(alpha, sub) == alpha - KForm.basis(6, 2, 4, 5, coeff=9) - KForm.basis(6, 1, 4, 5, coeff=3 * s3) + KForm.basis(6, 2, 3, 5, coeff=3 * s3)
    assert substitute(beta, sub) == beta - KForm.basis(6, 2, 4, 6, coeff=3) - KForm.basis(6, 1, 4, 6, coeff=s3) + KForm.basis(6, 2, 3, 6, coeff=s3)


def test_theorem7():
    t0 = time.perf_counter()
    rep = theorem7_verify()
    elapsed = time.perf_counter() - t0
    assert rep.closed_after_sub
    assert rep.nonclosed_before_sub
    assert rep.irrational
    assert rep.ideal_witness_index in (1, 2, 3)
    assert rep.residue_monomials == []
    assert rep.substitution_paths_agree and rep.printed_effect_matches
    assert rep.ok
    assert elapsed < 1.0


def test_nonclosed_part_comes_from_e246():
    spec = builtin_algebra("m6x2")
    d_before = theorem7_verify().d_omega_before
    assert d_before == f("-6*e{12348}+6*e{12568}", 8)
    # d(e^{246}) = e^{1256} - e^{1234}; every monomial of d Omega contains one of those
    d246 = spec.d(KForm.basis(8, 2, 4, 6))
    pieces = [set(m) for m in d246.support()]
    assert all(any(p <= set(m) for p in pieces) for m in d_before.support())


def test_omega_hat_closed_directly():
    spec = builtin_algebra("m6x2")
    om_hat = substitute(build(StructureKind.OMEGA_PLUS), theorem_substitution())
    assert not spec.d(om_hat)
    assert not om_hat.is_rational()


def test_non_parallel_witness():
    w = non_parallel_witness(builtin_algebra("m6x2"), theorem_substitution())
    assert w["index"] in w["outside"] and w["index"] == 1
    assert w["span_rank"] <= 24


def test_flat_torus_has_no_witness():
    w = non_parallel_witness(builtin_algebra("abelian:8"), theorem_substitution())
    assert w["index"] is None and w["outside"] == []


def test_witness_needs_dimension_8():
    with pytest.raises(DimensionMismatch):
        non_parallel_witness(builtin_algebra("m6"))


# -- G2 ---------------------------------------------------------------------


def test_flat_g2_is_parallel():
    rep = classify_g2(builtin_algebra("abelian:7"), build(StructureKind.G2_THREE_FORM))
    assert rep.parallel and rep.calibrated and rep.cocalibrated
    assert rep.nearly_parallel_constant is None


def test_m6r_g2_not_calibrated():
    spec = builtin_algebra("m6r")
    phi = build(StructureKind.G2_THREE_FORM)
    rep = classify_g2(spec, phi)
    assert not rep.calibrated
    assert rep.d_phi == spec.d(phi) == f("-e{1234}+e{1256}-e{1357}", 7)
    assert not rep.parallel


def test_nearly_parallel_detector():
    phi = build(StructureKind.G2_THREE_FORM)
    rep = g2_type_from_derivatives(phi, hodge_star(phi) * 2, KForm.zero(7, 5))
    assert rep.nearly_parallel_constant == 2
    assert rep.cocalibrated and not rep.parallel
    off = g2_type_from_derivatives(phi, hodge_star(phi) * 2 + KForm.basis(7, 1, 2, 3, 4), KForm.zero(7, 5))
    assert off.nearly_parallel_constant is None


def test_g2_needs_dimension_7():
    with pytest.raises(DimensionMismatch):
        classify_g2(builtin_algebra("m6"), build(StructureKind.ALPHA))
