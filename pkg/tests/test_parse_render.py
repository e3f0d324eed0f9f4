import re

import pytest
from hypothesis import given, settings

from pia.errors import ExprSyntaxError
from pia.expr import Num, Sym, add, cos, mul, power, sin
from pia.parse import parse_expr
from pia.render import RenderSpec, fortran, fortran_statement, plain, render, tex

from trees import trees

x = Sym("x")


def test_example_a_entry():
    e = parse_expr("x*cos(x)^2 + sin(x)^2")
    assert e is add(mul(x, power(cos(x), 2)), power(sin(x), 2))


def test_budden_and_example_e_inputs():
    assert parse_expr("coef*x/(x - p)") is mul(Sym("coef"), x, power(add(x, mul(-1, Sym("p"))), -1))
    d0 = parse_expr("1/(4*x^2) + 4/x^4 + 38/x^6 + 748/x^8")
    assert plain(d0) == "748/x^8 + 38/x^6 + 4/x^4 + 1/(4*x^2)"


def test_precedence():
    assert parse_expr("-x^2") is mul(-1, power(x, 2))
    assert parse_expr("2^3^2") is Num(512)
    assert parse_expr("x/2/3") is parse_expr("x/6")


@pytest.mark.parametrize("text, pos", [("2 x", 2), ("x +", 3), ("(x", 2), ("sin x", 4), ("", 0)])
def test_syntax_errors_carry_position_and_expectations(text, pos):
    with pytest.raises(ExprSyntaxError) as info:
        parse_expr(text)
    assert info.value.position == pos
    assert info.value.expected


def test_implicit_multiplication_is_rejected():
    with pytest.raises(ExprSyntaxError):
        parse_expr("2x")


def test_plain_convention_and_fortran_power():
    assert plain(parse_expr("eps0/2")) == "eps0/2"
    assert fortran(power(x, 2)) == "x**2"


def test_fortran_uses_explicit_operators_and_balanced_parentheses():
    text = fortran(parse_expr("(x^2 + 1)/(x*(x - 1)) + sqrt(x)*sin(x)^2 - i*cos(2*x)"))
    assert "^" not in text
    assert text.count("(") == text.count(")")
    assert "(0.d0,1.d0)" in text


def test_fortran_statement_wraps_long_lines():
    e = parse_expr(" + ".join(f"{k}*x^{k}/(1 + x^2)" for k in range(1, 30)))
    text = fortran_statement("Y_4", e)
    lines = text.splitlines()
    assert len(lines) > 1
    assert all(len(l) <= 74 for l in lines)
    assert all(l.endswith("&") for l in lines[:-1])


def _balanced(t):
    depth = 0
    for ch in t:
        depth += ch == "{"
        depth -= ch == "}"
        if depth < 0:
            return False
    return depth == 0


def test_tex_names_and_fractions():
    t = tex(parse_expr("eps0/2"))
    assert t == r"\frac{\varepsilon_{0}}{2}"
    assert _balanced(tex(parse_expr("sqrt(x)*(1 + x)^(3/2)/(om*x^2)")))


def test_fraction_styles():
    e = parse_expr("1/(x*(x - 1))")
    assert render(e, RenderSpec("o", "s")) == "-1/x + 1/(-1 + x)"
    assert render(parse_expr("1/x + 1/(x - 1)"), RenderSpec("o", "c")) == "(-1 + 2*x)/(x*(-1 + x))"


def test_render_spec_validation():
    with pytest.raises(ValueError):
        RenderSpec("q")


@settings(max_examples=100, deadline=None)
@given(trees())
def test_plain_round_trip(e):
    assert parse_expr(plain(e)) is e


@settings(max_examples=100, deadline=None)
@given(trees())
def test_renderers_are_total(e):
    assert _balanced(tex(e))
    f = fortran(e)
    assert f.count("(") == f.count(")")
