import math
from fractions import Fraction

import numpy as np
import pytest

from holotorsion.lie_ce import builtin_algebra
from holotorsion.volume_lab import (
    ExpansionInput, adaptive_simpson, ball_volume, c2, c2_as_printed, c4, expansion_input_from_spec,
    expansion_report, is_flat_to_order, slab_volume, sphere_ball_ratio, sphere_expansion_input,
    sphere_expansion_oracle, tube_volume_cpn, unit_volume_radius,
)

BALL_TABLE = {1: 2, 2: 3.14, 3: 4.19, 4: 4.93, 5: 5.26, 6: 5.17, 7: 4.72, 8: 4.06, 9: 3.30, 10: 2.55, 15: 0.38, 20: 0.03}


@pytest.mark.parametrize("d, value", sorted(BALL_TABLE.items()))
def test_ball_table(d, value):
    assert abs(ball_volume(d) - value) <= 0.005


def test_ball_volumes_exact_cases():
    assert ball_volume(1, 0.5) == pytest.approx(1.0, rel=1e-15)
    assert ball_volume(2, 2.0) == pytest.approx(4 * math.pi, rel=1e-14)
    assert ball_volume(3) == pytest.approx(4 * math.pi / 3, rel=1e-14)
    assert ball_volume(7, 0) == 0.0
    assert ball_volume(4, 1.3) == pytest.approx(ball_volume(4) * 1.3**4, rel=1e-13)
    with pytest.raises(ValueError):
        ball_volume(0)
    with pytest.raises(ValueError):
        ball_volume(3, -1)


def test_ball_volume_peaks_at_five():
    vols = [ball_volume(d) for d in range(1, 21)]
    peak = int(np.argmax(vols))
    assert peak + 1 == 5
    assert all(a < b for a, b in zip(vols[:peak], vols[1:peak + 1]))
    assert all(a > b for a, b in zip(vols[peak:], vols[peak + 1:]))


def test_unit_radius():
    assert unit_volume_radius(1) == pytest.approx(0.5, abs=1e-9)
    assert unit_volume_radius(2) == pytest.approx(1 / math.sqrt(math.pi), abs=1e-9)
    assert abs(unit_volume_radius(1000) - 7.68) <= 0.01
    d = 10000
    assert unit_volume_radius(d) / math.sqrt(d / (2 * math.pi * math.e)) == pytest.approx(1, rel=0.01)


@pytest.mark.parametrize("d", [1, 2, 3, 7, 50, 333, 1000])
def test_unit_radius_has_unit_volume(d):
    assert abs(ball_volume(d, unit_volume_radius(d)) - 1) < 1e-9


def test_unit_radius_all_dimensions():
    worst = max(abs(ball_volume(d, unit_volume_radius(d)) - 1) for d in range(1, 1001))
    assert worst < 1e-9


def test_adaptive_simpson():
    assert adaptive_simpson(math.sin, 0, math.pi) == pytest.approx(2, abs=1e-10)
    assert adaptive_simpson(math.exp, 0, 1) == pytest.approx(math.e - 1, abs=1e-10)
    assert adaptive_simpson(math.sqrt, 0, 1) == pytest.approx(2 / 3, abs=1e-8)
    assert adaptive_simpson(math.cos, 1, 1) == 0


def test_slab_edge_cases():
    assert slab_volume(2, unit_volume_radius(2)) == pytest.approx(1, abs=1e-8)
    assert slab_volume(3, 10.0) == pytest.approx(1, abs=1e-8)
    assert slab_volume(5, 0) == 0
    # d = 2: the slab through a disc of unit area has exact area by elementary geometry
    r, w = 1 / math.sqrt(math.pi), 0.4
    exact = 2 * (w * math.sqrt(r * r - w * w) + r * r * math.asin(w / r))
    assert slab_volume(2, w) == pytest.approx(exact, abs=1e-9)
    with pytest.raises(ValueError):
        slab_volume(1, 0.4)


def test_slab_at_least_point_eight():
    vols = [slab_volume(d, 0.4) for d in range(2, 51)]
    assert min(vols) >= 0.8
    assert max(vols) <= 1.0


def test_slab_monotone_in_width():
    for d in (3, 10, 40):
        vols = [slab_volume(d, w) for w in np.linspace(0, 1.5, 16)]
        # up to the quadrature tolerance once the slab covers the ball
        assert all(a <= b + 1e-9 for a, b in zip(vols, vols[1:]))
        assert vols[-1] <= 1 + 1e-9


# -- expansion coefficients -------------------------------------------------


def test_flat_input():
    z = ExpansionInput(3, 0, 0, 0)
    assert c2(z) == 0 and c4(z) == 0
    assert is_flat_to_order(z)


def test_two_sphere_coefficients():
    s2 = ExpansionInput(1, 2, 2, 4)
    assert c4(s2) == Fraction(1, 360)
    assert c2(s2) == Fraction(-1, 12)
    assert c2_as_printed(s2) == Fraction(-1, 3)
    assert sphere_expansion_input(2) == ExpansionInput(Fraction(1), 2, 2, 4, 0)


def test_three_sphere_c4():
    assert c4(sphere_expansion_input(3)) == Fraction(2, 105)


def test_float_input():
    inp = ExpansionInput(1.0, 2.0, 2.0, 4.0)
    assert not inp.exact
    assert c4(inp) == pytest.approx(1 / 360, rel=1e-14)


def test_two_sphere_exact_ratio():
    # 2 pi (1 - cos r) / (pi r^2)
    for r in (0.05, 0.3, 1.0):
        assert sphere_ball_ratio(2, r) == pytest.approx(2 * (1 - math.cos(r)) / r**2, rel=1e-12)


@pytest.mark.parametrize("d", [2, 3, 4, 5, 6])
def test_sphere_oracle_matches_formulas(d):
    inp = sphere_expansion_input(d)
    f2, f4 = sphere_expansion_oracle(d)
    assert abs(f2 - float(c2(inp))) < 1e-5
    assert abs(f4 - float(c4(inp))) < 1e-5


def test_oracle_rejects_printed_c2_constant():
    f2, _ = sphere_expansion_oracle(4)
    inp = sphere_expansion_input(4)
    assert abs(f2 - float(c2_as_printed(inp))) > 0.1


def test_oracle_guardrails():
    with pytest.raises(ValueError):
        sphere_expansion_oracle(11)
    with pytest.warns(RuntimeWarning):
        sphere_expansion_oracle(2, r_max=0.3, samples=8)


def test_flat_torus_from_curvature():
    inp = expansion_input_from_spec(builtin_algebra("abelian:4"))
    assert c4(inp) == 0 and c2(inp) == 0
    assert is_flat_to_order(inp, 2)


def test_heisenberg_coefficients():
    # s = -1/2, |Ric|^2 = 3/4, |R|^2 = 11/4 on the 3-dim Heisenberg algebra, n = 3/2
    inp = expansion_input_from_spec(builtin_algebra("heisenberg3"))
    assert c2(inp) == Fraction(1, 60)
    assert c4(inp) == Fraction(8 * 3 - 3 * 11 + 5, 4 * 1440) / (Fraction(5, 2) * Fraction(7, 2))
    assert not is_flat_to_order(inp, 1)


def test_is_flat_to_order():
    # c2 = 0 but c4 != 0
    inp = ExpansionInput(2, 0, 1, 0)
    assert is_flat_to_order(inp, 1)
    assert not is_flat_to_order(inp, 2)
    with pytest.raises(ValueError):
        is_flat_to_order(inp, 3)


def test_report_keeps_both_constants():
    rep = expansion_report(ExpansionInput(1, 2, 2, 4))
    assert rep["c2"] == Fraction(-1, 12) and rep["c2_alternative"] == Fraction(-1, 3)
    assert rep["c4_float"] == pytest.approx(1 / 360)


# -- tubes ------------------------------------------------------------------


def test_tube_matches_spherical_cap():
    rs = np.linspace(0, math.pi / 2, 100)
    for r in rs:
        assert abs(tube_volume_cpn(1, 1, r) - math.pi / 2 * (1 - math.cos(2 * r))) < 1e-12


def test_tube_special_values():
    assert tube_volume_cpn(3, 2, 0) == 0
    assert tube_volume_cpn(2, 1, math.pi / 2) == pytest.approx(math.pi**2 / 2, rel=1e-14)
    with pytest.raises(ValueError):
        tube_volume_cpn(0, 1, 0.1)
    with pytest.raises(ValueError):
        tube_volume_cpn(1, 1, -0.1)


@pytest.mark.parametrize("n", [1, 2, 5])
def test_tube_monotone(n):
    vals = [tube_volume_cpn(n, 1, r) for r in np.linspace(0, math.pi / 2, 200)]
    assert all(a <= b for a, b in zip(vals, vals[1:]))
