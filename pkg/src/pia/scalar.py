"""Corrections Y_2n for a single equation u'' + R u = 0."""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import differentiate, simplify, simplify_flagged, together
from .expr import ONE, ZERO, Expr, Num, as_expr, mul, power, add, ufn

F = Fraction


@dataclass(frozen=True)
class ScalarCoefficients:
    """Numeric constants of the recurrence and of eps0, injectable for tests."""

    outer: Fraction = F(1, 2)          # Y_m = outer*(sum1 - sum2 + sum3)
    eps: Fraction = F(1)               # eps0*Y_a*Y_b
    first_derivs: Fraction = F(3, 4)   # Q^-2 Y_a' Y_b'
    second_deriv: Fraction = F(1, 2)   # Y_a Q^-2 (Y_b'' - ...)
    qsq_deriv: Fraction = F(1, 2)      # ... inner Q^-2 (Q^2)' Y_b'
    eps0_square: Fraction = F(5, 16)
    eps0_second: Fraction = F(1, 4)


DEFAULT_COEFFICIENTS = ScalarCoefficients()


@dataclass
class ScalarProblem:
    R: Expr = None
    af: Expr = ZERO
    nmax: int = 2
    input_mode: str = "explicit"      # explicit | general
    variable: str = "x"               # x | zeta
    var: str = None                   # symbol name; default x, or z in zeta mode
    eps0: Expr = None                 # optional override of the computed eps0
    simplify_orders: bool = True
    coefficients: ScalarCoefficients = DEFAULT_COEFFICIENTS

    def __post_init__(self):
        if self.R is not None:
            self.R = as_expr(self.R)
        self.af = as_expr(self.af)
        if self.eps0 is not None:
            self.eps0 = as_expr(self.eps0)
        if self.input_mode in ("i", "g"):
            self.input_mode = {"i": "explicit", "g": "general"}[self.input_mode]
        if self.variable in ("x", "z"):
            self.variable = {"x": "x", "z": "zeta"}[self.variable]
        if self.input_mode not in ("explicit", "general"):
            raise ValueError(f"input mode must be explicit or general, not {self.input_mode!r}")
        if self.variable not in ("x", "zeta"):
            raise ValueError(f"variable must be x or zeta, not {self.variable!r}")
        if self.input_mode == "explicit" and self.R is None:
            raise ValueError("explicit input needs R")
        if self.input_mode == "explicit" and self.variable == "zeta":
            raise ValueError("the zeta variable is only available in general mode")
        if self.var is None:
            self.var = "z" if self.variable == "zeta" else "x"
        if int(self.nmax) < 1:
            raise ValueError("nmax must be >= 1")


@dataclass
class ScalarCorrectionSeries:
    problem: ScalarProblem
    eps0: Expr
    Qsq: Expr
    Y: dict = field(default_factory=dict)
    cpu_seconds: dict = field(default_factory=dict)
    nonrigorous: bool = False

    def orders(self):
        return sorted(m for m in self.Y if m > 0)


def eps0_scalar(R, af, var="x", coefficients=DEFAULT_COEFFICIENTS):
    """(Q^2, eps0) with Q^2 = R - af, eps0 in single-fraction form."""
    Qsq = add(as_expr(R), mul(-1, as_expr(af)))
    return Qsq, eps0_from_qsq(Qsq, af, var, coefficients)


def eps0_from_qsq(Qsq, af, var="x", coefficients=DEFAULT_COEFFICIENTS, simplified=True):
    c = coefficients
    d1 = differentiate(Qsq, var)
    d2 = differentiate(d1, var)
    inv = power(Qsq, -1)
    raw = mul(add(mul(Num(c.eps0_square), power(mul(d1, inv), 2)),
                  mul(-Num(c.eps0_second), d2, inv), af), inv)
    if not simplified:
        return raw
    return together(simplify(raw))


def _even(m):
    return range(0, m - 1, 2)


def recurrence_step(m, Y, ep0, Qm2, dQsqor1, var, c=DEFAULT_COEFFICIENTS):
    """Y_m from Y_0..Y_{m-2} (dict of even orders)."""
    d = lambda e, k=1: differentiate(e, var, k)
    sum1 = add(*(mul(Y[a], Y[b]) for a in _even(m) for b in _even(m) if a + b == m))
    sum2 = add(*(mul(Y[a], Y[b], Y[g], Y[dd])
                 for a in _even(m) for b in _even(m) for g in _even(m) for dd in _even(m)
                 if a + b + g + dd == m))
    terms = []
    for a in _even(m):
        for b in _even(m):
            if a + b != m - 2:
                continue
            inner = add(d(Y[b], 2), mul(-Num(c.qsq_deriv), Qm2, dQsqor1, d(Y[b])))
            terms.append(add(
                mul(Num(c.eps), ep0, Y[a], Y[b]),
                mul(Num(c.first_derivs), Qm2, d(Y[a]), d(Y[b])),
                mul(-Num(c.second_deriv), Y[a], Qm2, inner),
            ))
    sum3 = add(*terms)
    return mul(Num(c.outer), add(sum1, mul(-1, sum2), sum3))


def scalar_corrections(p: ScalarProblem) -> ScalarCorrectionSeries:
    t0 = time.process_time()
    var = p.var
    c = p.coefficients
    v = as_expr(var)
    nonrigorous = False
    if p.input_mode == "explicit":
        Qsq = add(p.R, mul(-1, p.af))
        ep0 = p.eps0 if p.eps0 is not None else eps0_from_qsq(Qsq, p.af, var, c)
        Qsqor1 = Qsq
    else:
        ep0 = p.eps0 if p.eps0 is not None else ufn("eps0", v)
        if p.variable == "x":
            Qsq = ufn("Qsqr", v)
            Qsqor1 = Qsq
        else:
            Qsq = ONE
            Qsqor1 = ONE
    Qm2 = power(Qsqor1, -1)
    dQ = differentiate(Qsqor1, var)
    Y = {0: ONE}
    for n in range(1, int(p.nmax) + 1):
        m = 2 * n
        y = recurrence_step(m, Y, ep0, Qm2, dQ, var, c)
        if p.simplify_orders:
            y, flag = simplify_flagged(y)
            nonrigorous = nonrigorous or flag
        Y[m] = y
    t1 = time.process_time()
    series = ScalarCorrectionSeries(p, ep0, Qsq, Y, nonrigorous=nonrigorous)
    series.cpu_seconds["compute"] = t1 - t0
    return series
