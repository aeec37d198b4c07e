import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from holotorsion.errors import ParseError
from holotorsion.geodesic_lab import kernels
from holotorsion.geodesic_lab.expr import (
    Sym, add, compile_program, differentiate, div, evaluate, func, mul, neg, num, parse_expr,
    parse_triple, power, sub,
)

U, V = Sym("u"), Sym("v")
BACKENDS = ["python"] + (["cython"] if kernels.compiled_available() else [])


def test_parse_and_print():
    e = parse_expr("(2+cos(v))*cos(u)")
    assert str(e) == "(2+cos(v))*cos(u)"
    assert parse_expr("(2+Cos[v])Cos[u]") == e
    assert parse_expr("2u") == mul(num(2), U)
    assert parse_expr("-u^2") == neg(power(U, 2))
    assert parse_expr("u^(-1)") == power(U, -1)
    assert evaluate(parse_expr("pi/2"), 0, 0) == math.pi / 2


def test_triples():
    assert len(parse_triple("(u, v, 0)")) == 3
    assert parse_triple("{u, v, 0}") == parse_triple("(u, v, 0)")


@pytest.mark.parametrize("text, fragment", [
    ("(u, v,", "end of input"),
    ("tan(u)", "unknown identifier 'tan'"),
    ("sin(u, v)", "sin takes 1 argument, got 2"),
    ("1.2.3", "malformed number"),
    ("u^1.5", "exponent must be an integer"),
    ("sin", "function 'sin' needs an argument"),
    ("u $ v", "unexpected character"),
])
def test_parse_errors(text, fragment):
    parser = parse_triple if text.startswith("(u, v") else parse_expr
    with pytest.raises(ParseError) as info:
        parser(text)
    assert fragment in str(info.value)
    assert info.value.position is not None


def test_end_of_input_position():
    with pytest.raises(ParseError) as info:
        parse_triple("(u, v,")
    assert info.value.position == 6


def test_derivatives():
    assert differentiate(func("sin", U), "u") == func("cos", U)
    assert str(differentiate(parse_expr("(2+cos(v))*cos(u)"), "v")) == "-sin(v)*cos(u)"
    assert differentiate(parse_expr("sin(v)^3 + v"), "u") == num(0)
    with pytest.raises(ValueError):
        differentiate(U, "w")


def test_constant_folding():
    assert add(num(2), num(3)) == num(5)
    assert mul(num(0), U) == num(0)
    assert mul(num(1), U) == U
    assert sub(U, num(0)) == U
    assert power(U, 1) == U and power(U, 0) == num(1)
    with pytest.raises(ZeroDivisionError):
        div(U, num(0))


# -- random expressions -----------------------------------------------------

leaves = st.one_of(st.just(U), st.just(V), st.integers(-3, 3).map(num))


def _extend(children):
    return st.one_of(
        st.tuples(children, children).map(lambda t: add(*t)),
        st.tuples(children, children).map(lambda t: sub(*t)),
        st.tuples(children, children).map(lambda t: mul(*t)),
        st.tuples(children, st.integers(0, 3)).map(lambda t: power(*t)),
        children.map(neg),
        children.map(lambda c: func("sin", c)),
        children.map(lambda c: func("cos", c)),
        children.map(lambda c: div(c, add(num(3), func("cos", c)))),
    )


exprs = st.recursive(leaves, _extend, max_leaves=8)
points = st.tuples(st.floats(-1.5, 1.5), st.floats(-1.5, 1.5))


@settings(max_examples=80)
@given(exprs, points)
def test_print_parse_roundtrip(e, pt):
    u, v = pt
    again = parse_expr(str(e))
    assert math.isclose(evaluate(again, u, v), evaluate(e, u, v), rel_tol=1e-12, abs_tol=1e-12)


@settings(max_examples=80)
@given(exprs, points, st.sampled_from("uv"))
def test_derivative_matches_finite_difference(e, pt, var):
    u, v = pt
    h = 1e-5
    du, dv = (h, 0) if var == "u" else (0, h)
    fd = (evaluate(e, u + du, v + dv) - evaluate(e, u - du, v - dv)) / (2 * h)
    exact = evaluate(differentiate(e, var), u, v)
    assert abs(fd - exact) <= 1e-5 * max(1.0, abs(exact))


@pytest.mark.parametrize("backend", BACKENDS)
@settings(max_examples=40)
@given(st.lists(exprs, min_size=1, max_size=4))
def test_compiled_program_matches_tree(backend, es):
    code, consts, outputs = compile_program(es)
    us = np.linspace(-1.2, 1.3, 7)
    vs = np.linspace(0.9, -0.4, 7)
    got = kernels.eval_programs(code, consts, outputs, us, vs, backend=backend)
    for k, e in enumerate(es):
        np.testing.assert_allclose(got[k], evaluate(e, us, vs), rtol=1e-13, atol=1e-13)


def test_common_subexpressions_shared():
    e = parse_expr("cos(u)*cos(u) + cos(u)")
    code, _, _ = compile_program([e, parse_expr("cos(u)")])
    assert len(code) == 4  # u, cos u, product, sum
