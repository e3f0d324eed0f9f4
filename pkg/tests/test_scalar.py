import time

import pytest

from pia.calculus import simplify
from pia.expr import ONE, ZERO, Sym, add, mul, substitute
from pia.jobs import load_fixture, params_of
from pia.oracle import relative_error, scalar_corrections_jet
from pia.parse import parse_expr
from pia.scalar import ScalarProblem, eps0_scalar, scalar_corrections


def test_constant_r_has_no_corrections():
    s = scalar_corrections(ScalarProblem(R=parse_expr("k^2"), nmax=3))
    assert s.eps0 is ZERO
    assert all(s.Y[m] is ZERO for m in (2, 4, 6))


def test_only_even_orders():
    s = scalar_corrections(ScalarProblem(R=parse_expr("x"), nmax=3))
    assert s.orders() == [2, 4, 6]
    assert s.Y[0] is ONE


def test_auxiliary_function_enters_eps0():
    Qsq, eps0 = eps0_scalar(parse_expr("x^2"), parse_expr("1/(4*x^2)"))
    assert Qsq is parse_expr("x^2 - 1/(4*x^2)")
    s = scalar_corrections(ScalarProblem(R=parse_expr("x^2"), af=parse_expr("1/(4*x^2)"), nmax=1))
    assert s.eps0 is eps0


def test_explicit_eps0_override_is_used_verbatim():
    s = scalar_corrections(ScalarProblem(R=parse_expr("x"), eps0=parse_expr("e0"), nmax=1))
    assert s.Y[2] is parse_expr("e0/2")


@pytest.mark.parametrize("bad", [
    dict(input_mode="explicit"),
    dict(R=parse_expr("x"), input_mode="explicit", variable="zeta"),
    dict(R=parse_expr("x"), nmax=0),
    dict(R=parse_expr("x"), input_mode="sideways"),
])
def test_problem_validation(bad):
    with pytest.raises(ValueError):
        ScalarProblem(**bad)


def test_zeta_mode_matches_x_mode_with_unit_qsq():
    z = scalar_corrections(ScalarProblem(input_mode="general", variable="zeta", nmax=3))
    g = scalar_corrections(ScalarProblem(input_mode="general", variable="x", nmax=3))
    unit = {"Qsqr": ("t", ONE)}
    for m in (2, 4, 6):
        xm = simplify(substitute(g.Y[m], functions=unit))
        zm = substitute(z.Y[m], {"z": Sym("x")})
        assert simplify(add(xm, mul(-1, zm))) is ZERO


@pytest.mark.parametrize("name", ["parabolic", "budden"])
def test_symbolic_matches_jets_to_order_eight(name):
    job = load_fixture(name)
    p = ScalarProblem(R=job.get("R"), nmax=4)
    s = scalar_corrections(p)
    params = params_of(job)
    for x0 in job.get("points"):
        env = {**params, "x": x0}
        jets = scalar_corrections_jet(p, x0, params)
        for m in (2, 4, 6, 8):
            from pia.expr import evaluate
            assert relative_error(evaluate(s.Y[m], env), jets["Y"][m].value) <= 1e-10


def test_scaling_of_corrections():
    # R -> lam^2 R scales Y_2n by lam^(-2n)
    lam2 = 9.0
    base = ScalarProblem(R=parse_expr("x^2 - 1"), nmax=3)
    scaled = ScalarProblem(R=parse_expr("9*(x^2 - 1)"), nmax=3)
    for x0 in (1.5, 2.2, 3.0):
        a = scalar_corrections_jet(base, x0)["Y"]
        b = scalar_corrections_jet(scaled, x0)["Y"]
        for n in (1, 2, 3):
            ratio = complex(b[2 * n].value) / complex(a[2 * n].value)
            assert abs(ratio - lam2 ** (-n)) <= 1e-10 * lam2 ** (-n)


def test_general_mode_with_opaque_qsq():
    s = scalar_corrections(ScalarProblem(input_mode="general", variable="x", nmax=2))
    assert "Qsqr" in str(s.Y[4]) and "eps0" in str(s.Y[4])


def test_timing_is_recorded():
    t0 = time.perf_counter()
    s = scalar_corrections(ScalarProblem(R=parse_expr("coef*(x^2 - x1^2)"), nmax=3))
    assert 0 <= s.cpu_seconds["compute"] <= time.perf_counter() - t0 + 1
