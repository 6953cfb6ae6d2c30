import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gcurv.expr import BinOp, Call, DomainError, Neg, Num, ParseError, Var, eval_float, eval_jet, free_variables, parse
from gcurv.jets import Jet, compose_jets


def test_parse_structure():
    e = parse("u*v + 2", ("u", "v"))
    assert e == BinOp("+", BinOp("*", Var("u", 0), Var("v", 1)), Num(2.0))


def test_parse_log_quotient():
    e = parse("log(u)/2", ("u", "v", "x2", "y2"))
    assert e == BinOp("/", Call("log", Var("u", 0)), Num(2.0))


def test_unary_minus_binds_looser_than_power():
    assert parse("-x^2", ("x",)) == Neg(BinOp("^", Var("x", 0), Num(2.0)))
    assert eval_float(parse("-x^2", ("x",)), [3.0]) == -9.0
    assert eval_float(parse("x^-1", ("x",)), [4.0]) == 0.25


def test_power_is_right_associative():
    assert eval_float(parse("2^3^2", ()), []) == 512.0


def test_unknown_identifier_reports_location():
    with pytest.raises(ParseError, match="unknown identifier w") as info:
        parse("u + w", ("u", "v"))
    assert info.value.offset == 4
    assert info.value.expected == {"u", "v"}


@pytest.mark.parametrize("text", ["", "u +", "(u", "u)", "sin u", "u ** 2", "3u", "foo(u)"])
def test_malformed_input(text):
    with pytest.raises(ParseError):
        parse(text, ("u",))


@pytest.mark.parametrize(
    "text, point",
    [("log(u)", [0.0]), ("log(u)", [-1.0]), ("sqrt(u)", [-0.5]), ("1/u", [0.0]), ("u^0.5", [-2.0])],
)
def test_domain_errors(text, point):
    with pytest.raises(DomainError):
        eval_jet(parse(text, ("u",)), point)


def test_free_variables():
    assert free_variables(parse("sin(x)*exp(y) + 1", ("x", "y", "z"))) == {"x", "y"}


def test_polynomial_jet():
    j = eval_jet(parse("x^2", ("x",)), [3.0])
    assert j.value == 9.0
    np.testing.assert_allclose(j.grad, [6.0])
    np.testing.assert_allclose(j.hess, [[2.0]])
    np.testing.assert_allclose(j.third, [[[0.0]]])


def test_log_jet():
    j = eval_jet(parse("log(u)/2", ("u", "v")), [1.0, 0.0])
    assert j.value == 0.0
    np.testing.assert_allclose(j.grad, [0.5, 0.0])
    np.testing.assert_allclose(j.hess, [[-0.5, 0.0], [0.0, 0.0]])
    assert j.third[0, 0, 0] == pytest.approx(1.0)


def test_sin_exp_jet():
    j = eval_jet(parse("sin(x)*exp(y)", ("x", "y")), [0.0, 0.0])
    assert j.value == 0.0
    np.testing.assert_allclose(j.grad, [1.0, 0.0])
    np.testing.assert_allclose(j.hess, [[0.0, 1.0], [1.0, 0.0]])


def test_compose_square_of_sum():
    outer = eval_jet(parse("s^2", ("s",)), [2.0])
    inner = eval_jet(parse("u+v", ("u", "v")), [1.0, 1.0])
    out = compose_jets(outer, [inner])
    assert out.value == 4.0
    np.testing.assert_allclose(out.grad, [4.0, 4.0])
    np.testing.assert_allclose(out.hess, [[2.0, 2.0], [2.0, 2.0]])
    np.testing.assert_allclose(out.third, 0.0)


def test_compose_with_identity_returns_inner():
    inner = eval_jet(parse("sin(u)*v^2", ("u", "v")), [0.3, 0.7])
    ident = Jet.variable([float(inner.value)], 0)
    out = compose_jets(ident, [inner])
    for a, b in zip((out.value, out.grad, out.hess, out.third), (inner.value, inner.grad, inner.hess, inner.third)):
        np.testing.assert_allclose(a, b, atol=1e-15)


def test_compose_with_constant_outer():
    outer = Jet.constant(5.0, 1)
    inner = eval_jet(parse("u*v", ("u", "v")), [1.0, 2.0])
    out = compose_jets(outer, [inner])
    assert out.value == 5.0
    np.testing.assert_allclose(out.grad, 0.0)
    np.testing.assert_allclose(out.third, 0.0)


finite = st.floats(-1.5, 1.5, allow_nan=False)


@given(finite, finite)
@settings(max_examples=50, deadline=None)
def test_jet_derivatives_are_symmetric(x, y):
    j = eval_jet(parse("sin(x*y)*exp(x) + x^3*y + cosh(y)/(2 + x^2)", ("x", "y")), [x, y])
    np.testing.assert_allclose(j.hess, j.hess.T, atol=1e-12)
    for perm in [(1, 0, 2), (0, 2, 1), (2, 1, 0)]:
        np.testing.assert_allclose(j.third, j.third.transpose(perm), atol=1e-12)


@given(finite, finite)
@settings(max_examples=50, deadline=None)
def test_product_rule(x, y):
    names = ("x", "y")
    f = eval_jet(parse("sin(x) + y^2", names), [x, y])
    g = eval_jet(parse("exp(x*y)", names), [x, y])
    fg = eval_jet(parse("(sin(x) + y^2)*exp(x*y)", names), [x, y])
    prod = f * g
    for a, b in zip((prod.value, prod.grad, prod.hess, prod.third), (fg.value, fg.grad, fg.hess, fg.third)):
        np.testing.assert_allclose(a, b, rtol=1e-12, atol=1e-12)


@given(st.floats(0.1, 3.0))
@settings(max_examples=30, deadline=None)
def test_exp_log_roundtrip(u):
    j = eval_jet(parse("exp(log(u))", ("u",)), [u])
    assert j.value == pytest.approx(u)
    np.testing.assert_allclose(j.grad, [1.0], atol=1e-12)
    np.testing.assert_allclose(j.hess, [[0.0]], atol=1e-12)
    np.testing.assert_allclose(j.third, [[[0.0]]], atol=1e-11)

