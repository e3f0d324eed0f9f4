"""Corrections for two coupled equations u'' + R u = 0 (R a 2x2 matrix).

``coupled_corrections`` runs the full eigen pipeline; ``abstract_b_vectors``
evaluates the b_m recurrence alone with uninterpreted s_m, Y_m, Q and eps0.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from fractions import Fraction

from .calculus import apart, differentiate, integrate, simplify, together, trig_expand
from .calculus.normal import is_zero
from .errors import (
    DegenerateEigenproblem, FactorizationOutOfScope, NotIntegrable, SignUndeterminable,
    UnboundSymbol, ZeroDenominator,
)
from .expr import (
    I, ONE, ZERO, Expr, Num, add, as_expr, assuming, cc, cos, evaluate, im, mul, power, re,
    sin, sqrt, substitute, ufn,
)
from .scalar import DEFAULT_COEFFICIENTS as SCALAR_DEFAULTS, eps0_from_qsq

F = Fraction

THEORIES = ("simplified", "fulling", "wronskian")


@dataclass(frozen=True)
class CoupledCoefficients:
    """Numeric constants of the b_m recurrence, injectable for tests."""

    outer: Fraction = F(1, 2)        # b_m = outer*(sum1 - sum2 + ... + sum6)
    sum1_two: Fraction = F(2)        # sv_s + 2 (Y_s sv_0 - b_s)
    sum5_two: Fraction = F(2)        # i 2 sum5
    sum6_half: Fraction = F(1, 2)    # (1/2) Q^-2 (Y_b'' - ...) sv_s
    sum6_three_quarters: Fraction = F(3, 4)


DEFAULT_COEFFICIENTS = CoupledCoefficients()


def _vec(*xs):
    return tuple(as_expr(x) for x in xs)


def _vadd(*vs):
    return tuple(add(*comp) for comp in zip(*vs))


def _vscale(c, v):
    return tuple(mul(c, a) for a in v)


def _vd(v, var, k=1):
    return tuple(differentiate(a, var, k) for a in v)


def _dot(u, v):
    return add(*(mul(a, b) for a, b in zip(u, v)))


def _vsimp(v):
    return tuple(simplify(a) for a in v)


@dataclass
class CoupledProblem:
    R11: Expr = None
    R12: Expr = None
    R21: Expr = None
    R22: Expr = None
    af: Expr = ZERO
    mmax: int = 2
    branch: str = "minus"
    automatic: bool = True
    parrepls: dict = field(default_factory=dict)
    Delta: Expr = None
    sqrtDel: Expr = None
    signQsq: int = None
    g_factor: Expr = ONE
    normalize: bool = False
    integrate_theta: bool = True
    hermitian: bool = True
    theory: str = "simplified"
    trig_expand: bool = False
    positive: tuple = ()
    eps0: Expr = None
    var: str = "x"
    simplify_max_order: int = None     # simplify quantities up to this order (default all)
    coefficients: CoupledCoefficients = DEFAULT_COEFFICIENTS

    def __post_init__(self):
        for name in ("R11", "R12", "R21", "R22"):
            if getattr(self, name) is None:
                raise ValueError(f"{name} is required")
            setattr(self, name, as_expr(getattr(self, name)))
        self.af = as_expr(self.af)
        self.g_factor = as_expr(self.g_factor)
        self.branch = {"m": "minus", "p": "plus"}.get(self.branch, self.branch)
        if self.branch not in ("minus", "plus"):
            raise ValueError(f"branch must be minus or plus, not {self.branch!r}")
        self.theory = {"s": "simplified", "f": "fulling", "w": "wronskian"}.get(self.theory, self.theory)
        if self.theory not in THEORIES:
            raise ValueError(f"unknown theory {self.theory!r}")
        if not self.hermitian:
            # the non-hermitian formulas exist only for the simplified theory
            self.theory = "simplified"
        self.parrepls = {k: as_expr(v) for k, v in (self.parrepls or {}).items()}
        if not self.automatic:
            missing = [n for n in ("Delta", "sqrtDel", "signQsq") if getattr(self, n) is None]
            if missing:
                raise ValueError("non-automatic runs need " + ", ".join(missing))
        if self.Delta is not None:
            self.Delta = as_expr(self.Delta)
        if self.sqrtDel is not None:
            self.sqrtDel = as_expr(self.sqrtDel)
        if self.signQsq is not None:
            self.signQsq = -1 if int(self.signQsq) < 0 else 1
        if self.eps0 is not None:
            self.eps0 = as_expr(self.eps0)
        if int(self.mmax) < 1:
            raise ValueError("mmax must be >= 1")
        self.positive = tuple(self.positive)


@dataclass
class EigenFrame:
    G: tuple
    Delta: Expr
    sqrtDel: Expr
    Qsq: Expr
    signQsq: int
    eps0: Expr
    Q: Expr
    s02os01: Expr
    g_factor: Expr
    s0v: tuple
    spv: tuple
    asqr: Expr
    intg: Expr
    theta: Expr
    den: Expr
    coef: Expr


@dataclass
class CoupledCorrectionSeries:
    problem: CoupledProblem
    frame: EigenFrame
    bv: dict = field(default_factory=dict)
    cpf: dict = field(default_factory=dict)
    cf: dict = field(default_factory=dict)
    sv: dict = field(default_factory=dict)
    Y: dict = field(default_factory=dict)
    cpu_seconds: dict = field(default_factory=dict)

    def orders(self):
        return sorted(m for m in self.cpf)


# -- eigen pipeline ------------------------------------------------------------


def _maybe_trig(e, on):
    return trig_expand(e) if on else e


def determine_sign(Qsq, parrepls, functions=None):
    """-1 when Qsq evaluates to a negative real number under parrepls, else 1."""
    val = substitute(Qsq, parrepls)
    try:
        z = evaluate(val, {}, functions or {})
    except (UnboundSymbol, ZeroDivisionError, ValueError, OverflowError):
        return 1
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        return 1
    return -1 if z.real < 0 else 1


def eigen_frame(p: CoupledProblem) -> EigenFrame:
    var = p.var
    te = p.trig_expand
    G11 = add(p.R11, mul(-1, p.af))
    G12, G21 = p.R12, p.R21
    G22 = add(p.R22, mul(-1, p.af))
    if p.automatic:
        Delta = add(power(add(G11, mul(-1, G22)), 2), mul(4, G12, G21))
    else:
        Delta = p.Delta
    Delta = simplify(_maybe_trig(Delta, te))
    if p.automatic and is_zero(Delta):
        raise DegenerateEigenproblem("Delta vanishes identically: coincident eigenvalues")
    sqrtDel = sqrt(Delta) if p.automatic else p.sqrtDel
    sgn = -1 if p.branch == "minus" else 1
    Qsq = simplify(mul(F(1, 2), add(G11, G22, mul(sgn, sqrtDel))))
    Qsq = _maybe_trig(Qsq, te)
    if p.automatic:
        if not p.parrepls:
            raise SignUndeterminable("automatic sign determination needs parrepls")
        signQsq = determine_sign(Qsq, p.parrepls)
    else:
        signQsq = p.signQsq
    if p.eps0 is not None:
        eps0 = p.eps0
    else:
        eps0 = eps0_from_qsq(Qsq, p.af, var, SCALAR_DEFAULTS)
    if signQsq < 0:
        Q = mul(-1, I, power(mul(-1, Qsq), F(1, 2)))
    else:
        Q = power(Qsq, F(1, 2))
    if is_zero(G12):
        raise DegenerateEigenproblem("G12 vanishes identically; the eigenvector ratio is undefined")
    s02os01 = mul(add(Qsq, mul(-1, G11)), power(G12, -1))
    s02os01 = simplify(_maybe_trig(s02os01, te))
    fact = p.g_factor
    s0v1, s0v2 = fact, mul(fact, s02os01)
    asqr = add(mul(s0v1, cc(s0v1)), mul(s0v2, cc(s0v2)))
    asqr = _maybe_trig(asqr, te)
    intg = None
    theta = None
    if p.normalize:
        ms0v = sqrt(simplify(asqr))
        s0v1 = mul(s0v1, power(ms0v, -1))
        s0v2 = mul(s0v2, power(ms0v, -1))
        asqr = ONE
        intg = add(mul(cc(s0v1), differentiate(s0v1, var)), mul(cc(s0v2), differentiate(s0v2, var)))
        intg = simplify(_maybe_trig(intg, te))
        if intg is not ZERO and p.integrate_theta:
            try:
                theta = mul(I, integrate(intg, var))
            except NotIntegrable as exc:
                raise NotIntegrable(f"cannot integrate the phase integrand: {exc}") from None
            phasf = add(cos(theta), mul(I, sin(theta)))
            s0v1 = mul(s0v1, phasf)
            s0v2 = mul(s0v2, phasf)
    s0v1, s0v2 = simplify(s0v1), simplify(s0v2)
    asqr = simplify(asqr)
    s0v = (s0v1, s0v2)
    spv = (mul(-1, cc(s0v2)), cc(s0v1))
    s0v1ms = mul(s0v1, cc(s0v1))
    s0v2ms = mul(s0v2, cc(s0v2))
    den = add(
        mul(s0v1ms, add(G22, mul(-1, Qsq))),
        mul(s0v2ms, add(G11, mul(-1, Qsq))),
        mul(-1, cc(s0v1), s0v2, G12),
        mul(-1, s0v1, cc(s0v2), G21),
    )
    den = simplify(_maybe_trig(den, te))
    if den is ZERO or is_zero(den):
        raise ZeroDenominator("the denominator D vanishes identically (defective eigenproblem)")
    try:
        den = apart(den, var)
    except FactorizationOutOfScope as exc:
        den = exc.together
    coef = mul(-2, Qsq, power(den, -1))
    return EigenFrame(
        G=(G11, G12, G21, G22), Delta=Delta, sqrtDel=sqrtDel, Qsq=Qsq, signQsq=signQsq,
        eps0=eps0, Q=Q, s02os01=s02os01, g_factor=fact, s0v=s0v, spv=spv, asqr=asqr,
        intg=intg, theta=theta, den=den, coef=coef,
    )


# -- the b_m recurrence -----------------------------------------------------------


def b_step(m, Y, sv, bv, Qm1, Qm2, dQ, eps0, var, c=DEFAULT_COEFFICIENTS):
    """b_m from Y_0..Y_{m-1}, s_0..s_{m-1}, b_1..b_{m-1} (vectors are tuples)."""
    n = len(sv[0])
    zero = tuple(ZERO for _ in range(n))
    d = lambda e, k=1: differentiate(e, var, k)
    r1 = range(0, m)        # 0..m-1
    # sum1: a + b + s = m, s >= 1
    sum1 = []
    for s in range(1, m):
        w = _vadd(sv[s], _vscale(c.sum1_two, _vadd(_vscale(Y[s], sv[0]), _vscale(-1, bv[s]))))
        coeff = add(*(mul(Y[a], Y[m - s - a]) for a in r1 if 0 <= m - s - a < m))
        if coeff is not ZERO:
            sum1.append(_vscale(coeff, w))
    # sum2: a + b + g + d + s = m, s >= 1
    sum2 = []
    for s in range(1, m):
        rest = m - s
        coeff = add(*(mul(Y[a], Y[b], Y[g], Y[rest - a - b - g])
                      for a in r1 for b in r1 for g in r1 if 0 <= rest - a - b - g < m))
        if coeff is not ZERO:
            sum2.append(_vscale(coeff, sv[s]))
    sum3 = add(*(mul(Y[a], Y[m - a]) for a in range(1, m) if 1 <= m - a <= m - 1))
    sum4 = add(*(mul(Y[a], Y[b], Y[g], Y[m - a - b - g])
                 for a in r1 for b in r1 for g in r1 if 0 <= m - a - b - g < m))
    # sum5: a + b + g + s = m - 1
    sum5 = []
    for s in r1:
        rest = m - 1 - s
        coeff = add(*(mul(Y[a], Y[b], Y[rest - a - b])
                      for a in r1 for b in r1 if 0 <= rest - a - b < m))
        if coeff is not ZERO:
            sum5.append(_vscale(mul(coeff, Qm1), _vd(sv[s], var)))
    # sum6: a + b + s = m - 2
    sum6 = []
    r2 = range(0, m - 1)    # 0..m-2
    for a in r2:
        for b in r2:
            s = m - 2 - a - b
            if s < 0:
                continue
            svs, dsv, d2sv = sv[s], _vd(sv[s], var), _vd(sv[s], var, 2)
            Ya, Yb = Y[a], Y[b]
            dYb, d2Yb = d(Yb), d(Yb, 2)
            t1 = _vscale(Yb, _vadd(_vscale(Qm2, _vadd(d2sv, _vscale(mul(-1, Qm1, dQ), dsv))),
                                   _vscale(eps0, svs)))
            t2 = _vscale(mul(-1, Qm2, dYb), dsv)
            t3 = _vscale(mul(-c.sum6_half, Qm2, add(d2Yb, mul(-1, Qm1, dQ, dYb))), svs)
            inner = _vscale(Ya, _vadd(t1, t2, t3))
            last = _vscale(mul(c.sum6_three_quarters, Qm2, d(Ya), dYb), svs)
            sum6.append(_vadd(inner, last))
    total = _vadd(
        _vadd(zero, *sum1) if sum1 else zero,
        _vscale(-1, _vadd(zero, *sum2)) if sum2 else zero,
        _vscale(add(sum3, mul(-1, sum4)), sv[0]),
        _vscale(mul(I, c.sum5_two), _vadd(zero, *sum5)) if sum5 else zero,
        _vadd(zero, *sum6) if sum6 else zero,
    )
    return _vscale(c.outer, total)


# -- extraction of the order-m quantities -----------------------------------------


def _integrand(m1, p, frame, cpf, sv, var):
    if p.theory == "simplified":
        return ZERO
    s0v1, s0v2 = frame.s0v
    core = _dot(_vscale(cpf[m1], (cc(differentiate(s0v1, var)), cc(differentiate(s0v2, var)))),
                frame.spv)
    if m1 % 2 == 1 and p.theory == "wronskian":
        out = mul(2, re(core))
    else:
        out = mul(I, 2, im(core))
    for alpha in range(1, m1):
        sign = -1 if (alpha % 2 == 1 and p.theory == "wronskian") else 1
        term = _dot(tuple(cc(a) for a in sv[alpha]), _vd(sv[m1 - alpha], var))
        out = add(out, mul(-sign, term))
    return out


def coupled_corrections(p: CoupledProblem) -> CoupledCorrectionSeries:
    with assuming(positive=p.positive):
        return _run(p)


def _run(p):
    t0 = time.process_time()
    var = p.var
    c = p.coefficients
    te = p.trig_expand
    frame = eigen_frame(p)
    Q = frame.Q
    Qm1 = power(Q, -1)
    Qm2 = power(Qm1, 2)
    dQ = differentiate(Q, var)
    G12 = frame.G[1]
    s0v1, s0v2 = frame.s0v
    series = CoupledCorrectionSeries(p, frame)
    smax = p.mmax if p.simplify_max_order is None else p.simplify_max_order
    simp = (lambda e, k: simplify(e) if k <= smax else e)
    Y = {0: ONE}
    sv = {0: frame.s0v}
    bv = {1: _vscale(mul(I, Qm1), _vd(frame.s0v, var))}
    bv[1] = tuple(simp(a, 1) for a in bv[1])
    cpf, cf = {}, {}
    mmxp1 = p.mmax + 1
    for m in range(2, mmxp1 + 1):
        m1 = m - 1
        cp = mul(frame.coef, _dot((mul(-1, s0v2), s0v1), bv[m1]))
        cpf[m1] = simp(_maybe_trig(cp, te), m1)
        if p.theory == "simplified":
            cf[m1] = ZERO
        else:
            ig = simplify(_maybe_trig(_integrand(m1, p, frame, cpf, sv, var), te))
            try:
                cf[m1] = integrate(ig, var)
            except NotIntegrable as exc:
                raise NotIntegrable(
                    f"c_{m1} integrand is outside the integrable class ({exc}); "
                    "rerun with theory = simplified"
                ) from None
        sv[m1] = _vadd(_vscale(cpf[m1], frame.spv), _vscale(cf[m1], frame.s0v))
        sv[m1] = tuple(simp(_maybe_trig(a, te), m1) for a in sv[m1])
        if p.hermitian:
            y = mul(_dot((cc(s0v1), cc(s0v2)), bv[m1]), power(frame.asqr, -1))
        else:
            y = mul(add(mul(Qm2, cpf[m1], G12, frame.asqr, power(mul(2, s0v1), -1)), bv[m1][0]),
                    power(s0v1, -1))
        Y[m1] = simp(_maybe_trig(y, te), m1)
        if m < mmxp1:
            b = b_step(m, Y, sv, bv, Qm1, Qm2, dQ, frame.eps0, var, c)
            bv[m] = tuple(simp(a, m) for a in b)
    series.bv = {k: v for k, v in bv.items() if k <= p.mmax}
    series.cpf, series.cf, series.sv, series.Y = cpf, cf, sv, Y
    series.cpu_seconds["compute"] = time.process_time() - t0
    return series


# -- abstract run (uninterpreted s_m, Y_m) -----------------------------------------


@dataclass
class AbstractSeries:
    mmax: int
    variable: str
    y1_zero: bool
    bv: dict
    cpu_seconds: dict = field(default_factory=dict)


def abstract_b_vectors(mmax=2, variable="x", y1_zero=False, coefficients=DEFAULT_COEFFICIENTS,
                       simplified=True) -> AbstractSeries:
    """b_1..b_mmax with s_m -> sv{m}(v), Y_m -> Y{m}(v), Q -> Q(v) (or 1 for zeta)."""
    t0 = time.process_time()
    variable = {"z": "zeta"}.get(variable, variable)
    var = "z" if variable == "zeta" else "x"
    v = as_expr(var)
    Q = ONE if variable == "zeta" else ufn("Q", v)
    Qm1 = power(Q, -1)
    Qm2 = power(Qm1, 2)
    dQ = differentiate(Q, var)
    eps0 = ufn("eps0", v)

    class _Lazy(dict):
        def __init__(self, make):
            super().__init__()
            self.make = make

        def __missing__(self, k):
            val = self.make(k)
            self[k] = val
            return val

    Y = _Lazy(lambda k: ufn(f"Y{k}", v))
    Y[0] = ONE
    if y1_zero:
        Y[1] = ZERO
    sv = _Lazy(lambda k: (ufn(f"sv{k}", v),))
    bv = {1: (mul(I, Qm1, differentiate(sv[0][0], var)),)}
    for m in range(2, mmax + 1):
        b = b_step(m, Y, sv, bv, Qm1, Qm2, dQ, eps0, var, coefficients)
        bv[m] = tuple(simplify(a) if simplified else a for a in b)
    out = AbstractSeries(mmax, variable, y1_zero, {k: bv[k][0] for k in bv})
    out.cpu_seconds["compute"] = time.process_time() - t0
    return out
