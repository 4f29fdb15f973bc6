import math
import random

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from tensional import jet as J
from tensional.errors import (DomainError, ExprSyntaxError, OrderTooLarge, UnknownFunction,
                              UnknownVariable)
from tensional.expr import (MAX_ORDER, PolyVerdict, eval_jet, expand_polynomial,
                            is_multilinear_polynomial, parse, parse_constant, to_source)

XYZ = ["x", "y", "z"]


def test_precedence_and_unary_minus():
    assert parse("1+2*3", []).evaluate([]) == 7
    assert parse("-x^2", ["x"]).evaluate([3.0]) == -9
    assert parse("2*x^-1", ["x"]).evaluate([4.0]) == 0.5
    assert parse("(1+x)/(2-x)", ["x"]).evaluate([1.0]) == 2


def test_functions_and_norm():
    ast = parse("sin(x)^2+cos(x)^2+norm(3,y)", ["x", "y"])
    assert ast.evaluate([0.3, 4.0]) == pytest.approx(6.0)
    assert parse("exp(log(x))", ["x"]).evaluate([2.5]) == pytest.approx(2.5)


def test_parameters_substitute_constants():
    p = parse_constant("2+sqrt(2)")
    ast = parse("z^(-2*p)", ["z"], {"p": p})
    assert ast.evaluate([2.0]) == pytest.approx(2.0 ** (-2 * p))
    assert ast.root.children[1].is_constant()


@pytest.mark.parametrize("src, exc, offset", [
    ("x^", ExprSyntaxError, 2),
    ("1+", ExprSyntaxError, 2),
    ("2*(x", ExprSyntaxError, 4),
    ("foo(x)", UnknownFunction, 1),
    ("q+1", UnknownVariable, 1),
    ("x^y", ExprSyntaxError, 3),
    ("2^3^2", ExprSyntaxError, 4),
    ("sin(x,y)", ExprSyntaxError, 1),
])
def test_errors_carry_offset_and_expected(src, exc, offset):
    with pytest.raises(exc) as info:
        parse(src, ["x", "y"])
    assert info.value.offset == offset
    assert info.value.expected


def test_unknown_variable_reports_known_names():
    with pytest.raises(UnknownVariable) as info:
        parse("w", XYZ)
    assert set(info.value.expected) == set(XYZ)


def test_round_trip_fixed():
    for src in ["x*y-3/(1+z)", "-(x+y)^3", "norm(x, y, z)^(-2)", "2.5e-3*exp(-x^2)"]:
        ast = parse(src, XYZ)
        again = parse(to_source(ast), XYZ)
        assert to_source(again) == to_source(ast)
        p = [0.3, -0.7, 1.1]
        assert again.evaluate(p) == pytest.approx(ast.evaluate(p), rel=1e-14)


def _expr_strategy():
    leaf = st.one_of(st.sampled_from(XYZ),
                     st.floats(0.1, 5.0).map(lambda v: f"{v:.4g}"))

    def extend(children):
        return st.one_of(
            st.tuples(children, st.sampled_from("+-*"), children).map(
                lambda t: f"({t[0]}{t[1]}{t[2]})"),
            st.tuples(children, children).map(lambda t: f"({t[0]})/(3+sin({t[1]}))"),
            st.tuples(st.sampled_from(["sin", "cos"]), children).map(
                lambda t: f"{t[0]}({t[1]})"),
            st.tuples(children, st.sampled_from(["2", "3", "-1*-1"])).map(
                lambda t: f"({t[0]})^({t[1]})"),
            children.map(lambda c: f"-({c})"),
        )
    return st.recursive(leaf, extend, max_leaves=8)


@settings(max_examples=150, deadline=None)
@given(_expr_strategy(), st.lists(st.floats(-2, 2), min_size=3, max_size=3))
def test_round_trip_property(src, point):
    ast = parse(src, XYZ)
    printed = to_source(ast)
    again = parse(printed, XYZ)
    assert to_source(again) == printed
    a, b = ast.evaluate(point), again.evaluate(point)
    assert a == pytest.approx(b, rel=1e-12, abs=1e-12)


def test_jet_partials_match_finite_differences():
    ast = parse("exp(x*y)*sin(z)+norm(x,y,z)^3/(2+cos(x))", XYZ)
    p = np.array([0.4, -0.3, 0.8])
    jet = eval_jet(ast, p, 2)
    h = 1e-5
    for i in range(3):
        e = np.zeros(3)
        e[i] = h
        fd = (ast.evaluate(p + e) - ast.evaluate(p - e)) / (2 * h)
        alpha = [0, 0, 0]
        alpha[i] = 1
        assert jet.partial(alpha) == pytest.approx(fd, rel=1e-8)


def test_jet_of_constant_expression():
    jet = eval_jet(parse("2+3", ["x"]), [1.0], 3)
    assert jet.value == 5 and jet.partial([2]) == 0


def test_order_cap_and_domain_errors():
    ast = parse("x^2", ["x"])
    with pytest.raises(OrderTooLarge):
        eval_jet(ast, [1.0], MAX_ORDER + 1)
    with pytest.raises(DomainError):
        eval_jet(parse("norm(x,y)", ["x", "y"]), [0.0, 0.0], 2)
    with pytest.raises(DomainError):
        eval_jet(parse("log(x)", ["x"]), [-1.0], 2)
    with pytest.raises(DomainError):
        eval_jet(parse("sqrt(x)", ["x"]), [0.0], 2)


def test_batched_evaluation():
    ast = parse("x*y^2", ["x", "y"])
    pts = np.array([[1.0, 2.0], [3.0, -1.0]])
    jet = eval_jet(ast, pts, 2)
    assert jet.shape == (2,)
    assert np.allclose(jet.value, [4.0, 3.0])
    assert np.allclose(jet.partial([0, 1]), [4.0, -6.0])
    assert np.allclose(jet.partial([1, 1]), [4.0, -2.0])


def test_multilinear_classification_examples():
    r = is_multilinear_polynomial(parse("x*y+3*x-(x+1)*(y-2)", ["x", "y"]))
    assert r.verdict is PolyVerdict.MULTILINEAR
    assert r.coefficients == {frozenset({"x"}): 5.0, frozenset({"y"}): -1.0, frozenset(): 2.0}
    assert is_multilinear_polynomial(parse("x^2", ["x"])).verdict is PolyVerdict.NOT_MULTILINEAR
    assert is_multilinear_polynomial(parse("x*y*x/2", ["x", "y"])).verdict is \
        PolyVerdict.NOT_MULTILINEAR
    assert is_multilinear_polynomial(parse("sin(x)", ["x"])).verdict is PolyVerdict.NOT_POLYNOMIAL
    assert is_multilinear_polynomial(parse("1/x", ["x"])).verdict is PolyVerdict.NOT_POLYNOMIAL
    # cancellation: x^2 - x*x is multilinear (identically zero)
    assert is_multilinear_polynomial(parse("x^2-x*x+y", ["x", "y"])).verdict is \
        PolyVerdict.MULTILINEAR


def test_expand_polynomial_division_by_constant():
    assert expand_polynomial(parse("(x+1)^2/2", ["x"])) == {(2,): 0.5, (1,): 1.0, (0,): 0.5}


def _random_poly(rng, nvars):
    terms = []
    for _ in range(rng.randrange(1, 5)):
        ex = [rng.randrange(0, 3) for _ in range(nvars)]
        c = rng.choice([1, 2, -3, 0.5])
        terms.append((tuple(ex), c))
    names = XYZ[:nvars]
    src = "+".join(f"({c})*" + "*".join(f"{n}^{e}" for n, e in zip(names, ex))
                   for ex, c in terms)
    return src, terms, names


def test_multilinear_verdict_agrees_with_jet_second_partials():
    """The symbolic verdict agrees with a numeric test: all pure second partials zero."""
    rng = random.Random(5)
    for _ in range(100):
        src, terms, names = _random_poly(rng, 3)
        ast = parse(src, names)
        verdict = is_multilinear_polynomial(ast).verdict
        pure_zero = True
        for k in range(3):
            p = np.array([rng.uniform(-1, 1) for _ in names])
            jet = eval_jet(ast, p, 2)
            for i in range(3):
                alpha = [0, 0, 0]
                alpha[i] = 2
                if abs(jet.partial(alpha)) > 1e-9:
                    pure_zero = False
        assert (verdict is PolyVerdict.MULTILINEAR) == pure_zero, src
