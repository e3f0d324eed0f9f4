"""Numeric re-implementation of both recurrences in jet arithmetic.

The multi-index sums are rewritten as coefficients of truncated power series
in a bookkeeping variable t: with T(t) = sum_{k<m} Y_k t^k, the sum over
a + b = m of Y_a Y_b is the t^m coefficient of T^2, and so on.  Nothing here
uses the symbolic engine except ``jet_eval`` for reading the input functions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.polynomial import chebyshev as C

from .jet import COMPLEX, DEFAULT_FLOOR, Jet, jcos, jet_eval, jsin, jsqrt

F = Fraction


# -- truncated series in t whose coefficients are jets (or jet vectors) --------


def _is_vec(a):
    return isinstance(a, tuple)


def _mul(a, b):
    if a is None or b is None:
        return None
    if _is_vec(a) and _is_vec(b):
        raise TypeError("vector times vector")
    if _is_vec(a):
        return tuple(x * b for x in a)
    if _is_vec(b):
        return tuple(a * y for y in b)
    return a * b


def _add(a, b):
    if a is None:
        return b
    if b is None:
        return a
    if _is_vec(a):
        return tuple(x + y for x, y in zip(a, b))
    return a + b


def _scale(c, a):
    if a is None:
        return None
    if _is_vec(a):
        return tuple(x * c for x in a)
    return a * c


def _d(a, k=1):
    if a is None:
        return None
    if _is_vec(a):
        return tuple(x.deriv(k) for x in a)
    return a.deriv(k)


def smul(A, B, n):
    """Product of series A, B (lists of coefficients) truncated at t^n."""
    out = [None] * (n + 1)
    for i, a in enumerate(A[: n + 1]):
        if a is None:
            continue
        for j, b in enumerate(B[: n + 1 - i]):
            if b is None:
                continue
            out[i + j] = _add(out[i + j], _mul(a, b))
    return out


def smap(f, A):
    return [None if a is None else f(a) for a in A]


def sadd(*series):
    n = max(len(s) for s in series)
    out = [None] * n
    for s in series:
        for k, a in enumerate(s):
            out[k] = _add(out[k], a)
    return out


def coeff(A, n):
    return A[n] if n < len(A) else None


def _series(d, upto, start=0):
    return [d.get(k) if start <= k <= upto else None for k in range(upto + 1)]


# -- scalar problem ------------------------------------------------------------


def _order_for(levels):
    return 2 * levels + 4


def scalar_corrections_jet(problem, x0, params=None, functions=None, order=None,
                           ctx=COMPLEX, floor=DEFAULT_FLOOR):
    """Y_0..Y_{2 nmax} at x0 as jets (dict by even order)."""
    params = params or {}
    nmax = int(problem.nmax)
    K = order if order is not None else _order_for(nmax)
    var = problem.var
    ev = lambda e: jet_eval(e, x0, K, params, functions, var, ctx, floor)
    if problem.input_mode == "explicit":
        af = ev(problem.af)
        Q2 = ev(problem.R) - af
        eps0 = ev(problem.eps0) if problem.eps0 is not None else _eps0(Q2, af)
    else:
        from .expr import Sym, ufn

        v = Sym(var)
        eps0 = ev(problem.eps0) if problem.eps0 is not None else ev(ufn("eps0", v))
        if problem.variable == "zeta":
            Q2 = Jet.constant(1, K, x0, ctx, floor)
        else:
            Q2 = ev(ufn("Qsqr", v))
    Qm2 = Q2.reciprocal()
    dQ2 = Q2.deriv()
    Y = {0: Jet.constant(1, K, x0, ctx, floor)}
    for n in range(1, nmax + 1):
        m = 2 * n
        T = _series(Y, m - 2)
        T2 = smul(T, T, m)
        sum1 = coeff(T2, m)
        sum2 = coeff(smul(T2, T2, m), m)
        dT = smap(lambda a: a.deriv(), T)
        d2T = smap(lambda a: a.deriv(2), T)
        inner = sadd(d2T, smap(lambda a: a * (Qm2 * dQ2) * F(-1, 2), dT))
        body = sadd(
            smap(lambda a: a * eps0, T2),
            smap(lambda a: a * Qm2 * F(3, 4), smul(dT, dT, m - 2)),
            smap(lambda a: a * Qm2 * F(-1, 2), smul(T, inner, m - 2)),
        )
        sum3 = coeff(body, m - 2)
        total = _add(_add(sum1, _scale(-1, sum2)), sum3)
        Y[m] = total * F(1, 2)
    return {"eps0": eps0, "Qsq": Q2, "Y": Y}


def _eps0(Q2, af):
    d1 = Q2.deriv()
    d2 = d1.deriv()
    r = d1 / Q2
    return (r * r * F(5, 16) - d2 / Q2 * F(1, 4) + af) / Q2


# -- coupled problem -------------------------------------------------------------


@dataclass
class CoupledJetResult:
    frame: dict
    Y: dict = field(default_factory=dict)
    cpf: dict = field(default_factory=dict)
    cf: dict = field(default_factory=dict)
    bv: dict = field(default_factory=dict)
    sv: dict = field(default_factory=dict)
    integrand: dict = field(default_factory=dict)


def _dot(u, v):
    acc = u[0] * v[0]
    for a, b in zip(u[1:], v[1:]):
        acc = acc + a * b
    return acc


def _vconj(u):
    return tuple(a.conj() for a in u)


def coupled_sign(problem, params=None, functions=None, ctx=COMPLEX):
    """signQsq from the value of Q^2 under the job's parameter bindings."""
    if not problem.automatic:
        return problem.signQsq
    bind = {k: complex(_num(v)) for k, v in problem.parrepls.items()}
    bind = {**(params or {}), **bind}
    var = problem.var
    if var not in bind:
        return 1
    x0 = bind.pop(var)
    try:
        Q2 = _frame_q2(problem, x0, 0, bind, functions, ctx, DEFAULT_FLOOR)
    except Exception:
        return 1
    z = ctx.to_complex(Q2.c[0])
    if abs(z.imag) > 1e-12 * max(1.0, abs(z.real)):
        return 1
    return -1 if z.real < 0 else 1


def _num(e):
    from .expr import evaluate

    return evaluate(e)


def _frame_q2(p, x0, K, params, functions, ctx, floor):
    ev = lambda e: jet_eval(e, x0, K, params, functions, p.var, ctx, floor)
    af = ev(p.af)
    G11, G12, G21, G22 = ev(p.R11) - af, ev(p.R12), ev(p.R21), ev(p.R22) - af
    if p.automatic:
        Delta = (G11 - G22) * (G11 - G22) + G12 * G21 * 4
        sq = jsqrt(Delta)
    else:
        sq = ev(p.sqrtDel)
    sgn = -1 if p.branch == "minus" else 1
    return (G11 + G22 + sq * sgn) * F(1, 2)


class _Pipeline:
    """The coupled pipeline at one point, given the integration constants."""

    def __init__(self, p, params, functions, ctx, floor, sign):
        self.p = p
        self.params = params
        self.functions = functions
        self.ctx = ctx
        self.floor = floor
        self.sign = sign

    def run(self, x0, K, cvals, theta0, upto):
        p = self.p
        ev = lambda e: jet_eval(e, x0, K, self.params, self.functions, p.var, self.ctx, self.floor)
        one = Jet.constant(1, K, x0, self.ctx, self.floor)
        I = self.ctx.const(1j)
        af = ev(p.af)
        G11, G12, G21, G22 = ev(p.R11) - af, ev(p.R12), ev(p.R21), ev(p.R22) - af
        if p.automatic:
            Delta = (G11 - G22) * (G11 - G22) + G12 * G21 * 4
            sq = jsqrt(Delta)
        else:
            Delta = ev(p.Delta)
            sq = ev(p.sqrtDel)
        sgn = -1 if p.branch == "minus" else 1
        Q2 = (G11 + G22 + sq * sgn) * F(1, 2)
        eps0 = ev(p.eps0) if p.eps0 is not None else _eps0(Q2, af)
        Q = jsqrt(-Q2) * (-I) if self.sign < 0 else jsqrt(Q2)
        Qm1 = Q.reciprocal()
        Qm2 = Qm1 * Qm1
        dQ = Q.deriv()
        ratio = (Q2 - G11) / G12
        g = ev(p.g_factor)
        s1, s2 = g, g * ratio
        asqr = s1 * s1.conj() + s2 * s2.conj()
        intg = None
        if p.normalize:
            norm = jsqrt(asqr)
            s1, s2 = s1 / norm, s2 / norm
            asqr = one
            intg = s1.conj() * s1.deriv() + s2.conj() * s2.deriv()
            if p.integrate_theta and intg.max_abs() > 1e-13:
                # theta = i * integral(intg); its value at x0 is supplied by the caller
                theta = Jet([self.ctx.const(theta0)] + [I * a / (k + 1) for k, a in enumerate(intg.c)],
                            x0, self.ctx, self.floor)
                phasf = jcos(theta) + jsin(theta) * I
                s1, s2 = s1 * phasf, s2 * phasf
        s0v = (s1, s2)
        spv = (-s2.conj(), s1.conj())
        den = (s1 * s1.conj() * (G22 - Q2) + s2 * s2.conj() * (G11 - Q2)
               - s1.conj() * s2 * G12 - s1 * s2.conj() * G21)
        coef = -Q2 * 2 / den
        frame = dict(G=(G11, G12, G21, G22), Delta=Delta, sqrtDel=sq, Qsq=Q2, eps0=eps0, Q=Q,
                     s02os01=ratio, s0v=s0v, spv=spv, asqr=asqr, intg=intg, den=den, coef=coef)
        res = CoupledJetResult(frame)
        Y = {0: one}
        sv = {0: s0v}
        bv = {1: tuple(a.deriv() * Qm1 * I for a in s0v)}
        for m in range(2, upto + 2):
            m1 = m - 1
            cp = coef * _dot((-s2, s1), bv[m1])
            res.cpf[m1] = cp
            if p.theory == "simplified":
                cf = None
            else:
                ig = self._integrand(m1, cp, s0v, spv, sv)
                res.integrand[m1] = ig
                cf = Jet([self.ctx.const(cvals.get(m1, 0))] + [a / (k + 1) for k, a in enumerate(ig.c)],
                         x0, self.ctx, self.floor)
            res.cf[m1] = cf
            sv[m1] = tuple(cp * a for a in spv)
            if cf is not None:
                sv[m1] = tuple(a + cf * b for a, b in zip(sv[m1], s0v))
            if p.hermitian:
                Y[m1] = _dot(_vconj(s0v), bv[m1]) / asqr
            else:
                Y[m1] = (Qm2 * cp * G12 * asqr / (s1 * 2) + bv[m1][0]) / s1
            if m <= upto:
                bv[m] = b_vector(m, Y, sv, bv, Qm1, Qm2, dQ, eps0, I)
        res.Y, res.sv, res.bv = Y, sv, bv
        return res

    def _integrand(self, m1, cp, s0v, spv, sv):
        p = self.p
        core = cp * _dot(tuple(a.deriv().conj() for a in s0v), spv)
        if m1 % 2 == 1 and p.theory == "wronskian":
            out = core.re() * 2
        else:
            out = core.im() * (2 * self.ctx.const(1j))
        for alpha in range(1, m1):
            sign = -1 if (alpha % 2 == 1 and p.theory == "wronskian") else 1
            out = out - _dot(_vconj(sv[alpha]), tuple(a.deriv() for a in sv[m1 - alpha])) * sign
        return out


def b_vector(m, Y, sv, bv, Qm1, Qm2, dQ, eps0, I):
    """b_m through series coefficients (see the module docstring)."""
    T = _series(Y, m - 1)
    Tt = _series(Y, m - 1, start=1)
    S = _series(sv, m - 1, start=1)
    S0 = _series(sv, m - 1)
    B = _series(bv, m - 1, start=1)
    s0 = sv[0]
    T2 = smul(T, T, m)
    T4 = smul(T2, T2, m)
    W = sadd(S, smap(lambda v: _scale(2, v), sadd(smul(Tt, [s0], m), smap(lambda v: _scale(-1, v), B))))
    sum1 = coeff(smul(T2, W, m), m)
    sum2 = coeff(smul(T4, S, m), m)
    sum3 = coeff(smul(Tt, Tt, m), m)
    sum4 = coeff(T4, m)
    dS0 = smap(_d, S0)
    sum5 = coeff(smul(smul(T2, T, m - 1), dS0, m - 1), m - 1)
    sum5 = _mul(Qm1, sum5)
    n = m - 2
    dT, d2T = smap(_d, T), smap(lambda a: a.deriv(2), T)
    d2S0 = smap(lambda a: _d(a, 2), S0)
    kQ = Qm1 * dQ
    inner_s = sadd(smap(lambda v: _scale(Qm2, v), sadd(d2S0, smap(lambda v: _scale(-kQ, v), dS0))),
                   smap(lambda v: _scale(eps0, v), S0))
    bracket = sadd(
        smul(T, inner_s, n),
        smap(lambda v: _scale(-Qm2, v), smul(dT, dS0, n)),
        smap(lambda v: _scale(Qm2 * F(-1, 2), v),
             smul(sadd(d2T, smap(lambda a: a * (-kQ), dT)), S0, n)),
    )
    sum6 = _add(coeff(smul(T, bracket, n), n),
                _scale(Qm2 * F(3, 4), coeff(smul(smul(dT, dT, n), S0, n), n)))
    total = _add(sum1, _scale(-1, sum2))
    s34 = _add(sum3, _scale(-1, sum4))
    total = _add(total, _mul(s34, s0))
    total = _add(total, _scale(2 * I, sum5))
    total = _add(total, sum6)
    return _scale(F(1, 2), total)


def coupled_corrections_jet(problem, x0, params=None, functions=None, mmax=None, order=None,
                            ctx=COMPLEX, floor=DEFAULT_FLOOR, anchor=None, initial=None,
                            nodes=32):
    """Numeric Y_m, cp_m, c_m (m <= mmax) at the real point x0.

    For the Fulling and Wronskian-conserving theories the constants c_m are
    obtained by spectral (Chebyshev interpolation) quadrature of the
    integrands from ``anchor`` to x0, starting from the values in ``initial``
    (a dict m -> c_m(anchor), default 0; key "theta" for the phase integral).
    The number of nodes doubles until the constants change by less than
    1e-12 relative.
    """
    params = dict(params or {})
    mmax = int(problem.mmax if mmax is None else mmax)
    K = order if order is not None else _order_for(mmax) + 2
    sign = coupled_sign(problem, params, functions, ctx)
    pipe = _Pipeline(problem, params, functions, ctx, floor, sign)
    initial = dict(initial or {})
    needs_c = problem.theory != "simplified"
    theta0 = initial.get("theta", 0)
    cvals = {}
    if needs_c or _has_theta(pipe, x0, K):
        if anchor is None:
            raise ValueError("integration constants need an anchor point")
        cvals, theta0 = _constants(pipe, problem, anchor, x0, K, mmax, initial, nodes, needs_c)
    return pipe.run(x0, K, cvals, theta0, mmax)


def _has_theta(pipe, x0, K):
    p = pipe.p
    if not (p.normalize and p.integrate_theta):
        return False
    res = pipe.run(x0, min(K, 3), {}, 0, 0)
    return res.frame["intg"] is not None and res.frame["intg"].max_abs() > 1e-13


def _constants(pipe, p, a, b, K, mmax, initial, nodes, needs_c, tol=1e-12, max_nodes=512):
    """Values at b of theta and c_1..c_mmax; node count doubles until they settle."""
    prev = None
    n = nodes
    while True:
        cur = _constants_at(pipe, p, a, b, mmax, initial, n, needs_c)
        if prev is not None:
            vals = [(cur[1], prev[1])] + [(cur[0][m], prev[0][m]) for m in cur[0]]
            if all(abs(u - v) <= tol * max(1.0, abs(u)) for u, v in vals):
                return cur
        if n >= max_nodes:
            return cur
        prev = cur
        n *= 2


def _constants_at(pipe, p, a, b, mmax, initial, nodes, needs_c):
    a, b = float(np.real(a)), float(np.real(b))
    if a == b:
        return {m: initial.get(m, 0) for m in range(1, mmax + 1)}, initial.get("theta", 0)
    u = np.cos(np.pi * (np.arange(nodes) + 0.5) / nodes)
    ts = (a + b) / 2 + (b - a) / 2 * u

    def antiderivative(values, start):
        # interpolate on the Chebyshev nodes, integrate from a; values at the nodes and at b
        cr = C.chebfit(u, np.real(values), nodes - 1)
        ci = C.chebfit(u, np.imag(values), nodes - 1)
        Ir = C.chebint(cr, lbnd=-1) * (b - a) / 2
        Ii = C.chebint(ci, lbnd=-1) * (b - a) / 2
        at = lambda x: C.chebval(x, Ir) + 1j * C.chebval(x, Ii)
        return start + at(u), start + at(1.0)

    theta_nodes = np.full(nodes, complex(initial.get("theta", 0)))
    theta_b = complex(initial.get("theta", 0))
    if p.normalize and p.integrate_theta:
        vals = np.array([complex(pipe.run(t, 3, {}, 0, 0).frame["intg"].c[0]) for t in ts])
        theta_nodes, theta_b = antiderivative(1j * vals, complex(initial.get("theta", 0)))
    c_nodes = {}
    c_b = {}
    if needs_c:
        for m in range(1, mmax + 1):
            vals = []
            for j, t in enumerate(ts):
                cv = {k: c_nodes[k][j] for k in c_nodes}
                res = pipe.run(t, _order_for(m) + 2, cv, theta_nodes[j], m)
                vals.append(complex(res.integrand[m].c[0]))
            c_nodes[m], c_b[m] = antiderivative(np.array(vals), complex(initial.get(m, 0)))
    return c_b, theta_b


# -- comparison -------------------------------------------------------------------


@dataclass
class CompareReport:
    rows: list                 # (name, symbolic, jet, error)
    rel_tol: float

    @property
    def worst(self):
        return max(self.rows, key=lambda r: r[3]) if self.rows else None

    @property
    def passed(self):
        return all(r[3] <= self.rel_tol for r in self.rows)

    def format(self):
        lines = []
        for name, a, b, err in self.rows:
            flag = "ok" if err <= self.rel_tol else "FAIL"
            lines.append(f"{name:>16}  {_fmt(a):>44}  {_fmt(b):>44}  {err:9.2e}  {flag}")
        w = self.worst
        if w is not None:
            lines.append(f"worst: {w[0]} error {w[3]:.2e} (tolerance {self.rel_tol:.0e})")
        lines.append("PASS" if self.passed else "FAIL")
        return "\n".join(lines)


def _fmt(z):
    z = complex(z)
    return f"{z.real:.15g}{z.imag:+.15g}i"


def relative_error(a, b):
    """|a - b| / max(1, |a|, |b|): relative for large values, absolute near 0."""
    a, b = complex(a), complex(b)
    return abs(a - b) / max(1.0, abs(a), abs(b))


def compare(symbolic: dict, jets: dict, rel_tol=1e-10) -> CompareReport:
    rows = []
    for name in symbolic:
        if name not in jets:
            continue
        a, b = symbolic[name], jets[name]
        rows.append((name, complex(a), complex(b), relative_error(a, b)))
    return CompareReport(rows, rel_tol)

