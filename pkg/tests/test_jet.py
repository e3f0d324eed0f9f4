import math
from fractions import Fraction

import mpmath
import pytest
from hypothesis import given, settings, strategies as st

from pia.errors import SingularPoint, UnboundSymbol
from pia.jet import Jet, MpContext, PolynomialFunction, jet_eval, jpow
from pia.parse import parse_expr

K = 8


def coeffs(text, x0, order=K, **kw):
    return [complex(c) for c in jet_eval(parse_expr(text), x0, order, **kw).c]


def assert_coeffs(got, want, tol=1e-13):
    for k, (a, b) in enumerate(zip(got, want)):
        assert abs(a - b) <= tol * max(1.0, abs(b)), (k, a, b)


def test_square_at_three():
    assert coeffs("x^2", 3, 2) == [9, 6, 1]


def test_sin_cos_at_zero():
    assert_coeffs(coeffs("sin(x)*cos(x)", 0, 3), [0, 1, 0, -2 / 3])


def test_example_e_h1_at_55():
    params = {"om": 26041e-7}
    got = coeffs("2*(om + 1/x^2)", 55, 0, params=params)[0]
    assert abs(got - 2 * (26041e-7 + 1 / 3025)) < 1e-16


@pytest.mark.parametrize("x0", [0.3, 1.1, 2.7])
def test_battery_against_closed_forms(x0):
    # sin x cos x = sin(2x)/2
    want = [2**k * [math.sin, math.cos, lambda t: -math.sin(t), lambda t: -math.cos(t)][k % 4](2 * x0)
            / 2 / math.factorial(k) for k in range(K + 1)]
    assert_coeffs(coeffs("sin(x)*cos(x)", x0), want)
    p = 4.5
    assert_coeffs(coeffs("1/(x - p)", x0, params={"p": p}),
                  [(-1) ** k / (x0 - p) ** (k + 1) for k in range(K + 1)])
    half = [float(mpmath.binomial(0.5, k)) * x0 ** (0.5 - k) for k in range(K + 1)]
    assert_coeffs(coeffs("sqrt(x)", x0), half)
    with mpmath.workdps(30):
        ref = mpmath.taylor(lambda t: mpmath.exp(mpmath.sin(t)), x0, K)
    assert_coeffs(coeffs("exp(sin(x))", x0), [complex(c) for c in ref])


@pytest.mark.parametrize("text", ["tan(x)", "log(x)*x^(2/3)", "exp(x)/(1 + x^2)", "cos(sqrt(x))^3"])
def test_against_mpmath_taylor(text):
    x0 = 1.3
    f = {"tan(x)": mpmath.tan,
         "log(x)*x^(2/3)": lambda t: mpmath.log(t) * t ** (mpmath.mpf(2) / 3),
         "exp(x)/(1 + x^2)": lambda t: mpmath.exp(t) / (1 + t**2),
         "cos(sqrt(x))^3": lambda t: mpmath.cos(mpmath.sqrt(t)) ** 3}[text]
    with mpmath.workdps(30):
        ref = [complex(c) for c in mpmath.taylor(f, x0, 6)]
    assert_coeffs(coeffs(text, x0, 6), ref, 1e-12)


@settings(max_examples=50, deadline=None)
@given(st.sampled_from(["sin(x)^2/(2 + x)", "sqrt(1 + x^2)*exp(-x)", "log(3 + x)^2*cos(x)",
                        "x^(5/2)*tan(x/3)"]),
       st.floats(0.2, 2.0))
def test_derivatives_agree_with_finite_differences(text, x0):
    h = 1e-6
    f = lambda t: coeffs(text, t, 0)[0]
    j = coeffs(text, x0, 1)
    fd = (f(x0 + h) - f(x0 - h)) / (2 * h)
    assert abs(j[1] - fd) <= 1e-5 * max(1.0, abs(j[1]))


def test_pow_recurrence_matches_repeated_product():
    x = Jet.variable(1.7, 6)
    f = x * x + x * 3 + 1
    assert_coeffs([complex(c) for c in jpow(f, Fraction(3)).c],
                  [complex(c) for c in (f * f * f).c])
    g = jpow(f, Fraction(1, 3))
    assert_coeffs([complex(c) for c in (g * g * g).c], [complex(c) for c in f.c])


def test_singular_point_below_floor():
    with pytest.raises(SingularPoint):
        jet_eval(parse_expr("1/(x - 2)"), 2.0, 3)
    with pytest.raises(SingularPoint):
        jet_eval(parse_expr("sqrt(x)"), 0.0, 3)


def test_unbound_symbol():
    with pytest.raises(UnboundSymbol):
        jet_eval(parse_expr("x + q"), 1.0, 1)


def test_opaque_function_definitions():
    defs = {"h": ("t", parse_expr("t^3"))}
    got = coeffs("h(2*x)", 1.0, 2, functions=defs)
    assert_coeffs(got, [8, 24, 24])
    poly = PolynomialFunction(0.0, [1.0, 2.0, 3.0])
    got = coeffs("g(x) + g'(x)", 0.5, 1, functions={"g": poly})
    assert_coeffs(got, [1 + 1 + 0.75 + 2 + 3, 2 + 3 + 6])


def test_high_precision_context():
    ctx = MpContext(40)
    with mpmath.workdps(40):
        j = jet_eval(parse_expr("(1 + x)^(1/2) - 1 - x/2"), mpmath.mpf("1e-12"), 0, ctx=ctx)
        assert abs(j.value - mpmath.mpf(-1.25e-25)) < 1e-36
