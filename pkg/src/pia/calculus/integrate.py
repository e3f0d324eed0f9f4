"""Restricted symbolic integration.

The classes handled, all with constant of integration 0:

* rational functions of v whose partial fractions have linear factors, or
  quadratic factors whose numerator is proportional to the factor's
  derivative;
* polynomials in v times polynomials in sin/cos of angles linear in v,
  integrated term by term through complex exponentials;
* polynomials in log(L), L linear in v, whose coefficients are Laurent
  polynomials in L (after the substitution u = L);
* any of the above in w after the substitution v = w^2 when sqrt(v) occurs.

Anything else raises NotIntegrable.
"""

from __future__ import annotations

from math import factorial

from ..errors import FactorizationOutOfScope, NotIntegrable
from fractions import Fraction

from ..expr import (
    FN, NUM, POW, I, ONE, ZERO, Expr, Num, Sym, add, as_expr, assuming, cos, log, mul, power, sin,
    substitute,
)
from .apart import apart_parts, poly_to_expr
from .diff import differentiate
from .normal import NormalForm, _frac, simplify


def integrate(e, var) -> Expr:
    """An antiderivative of e with respect to the symbol var."""
    e = as_expr(e)
    vname = var if isinstance(var, str) else var.name
    v = Sym(vname)
    if vname not in e.free:
        return mul(e, v)
    nf = NormalForm(e)
    if nf.is_zero():
        return ZERO
    conv = nf._conv
    dependent = [a for a in conv.order if vname in a.free and a is not v]
    for a in dependent:
        idx = conv.order.index(a)
        if nf.den.degree(idx) > 0:
            raise NotIntegrable(f"{a} appears in a denominator")
    used = [a for a in dependent if nf.num.degree(conv.order.index(a)) > 0]
    if not used:
        return _rational(e, vname, v)
    if any(_is_sqrt_of(a, v) for a in used):
        return _sqrt_substitution(e, vname, v)
    logs = [a for a in used if a.kind == FN and a.args[0] == "log"]
    if logs:
        if len(used) != 1:
            raise NotIntegrable("logarithm mixed with other transcendental terms")
        return _log_poly(nf, vname, v, logs[0])
    for a in used:
        if not (a.kind == FN and a.args[0] in ("sin", "cos")):
            raise NotIntegrable(f"cannot integrate expressions containing {a}")
    if v in conv.atoms and nf.den.degree(conv.atoms[v]) > 0:
        raise NotIntegrable("trigonometric terms over a denominator depending on the variable")
    return _trig_poly(nf, vname, v)


# -- rational functions --------------------------------------------------------


def _rational(e, vname, v):
    try:
        nf, parts = apart_parts(e, vname)
    except FactorizationOutOfScope as exc:
        raise NotIntegrable(str(exc)) from None
    if parts is None:
        # polynomial in v over constants
        conv = nf._conv
        vidx = conv.atoms[v]
        out = []
        for monom, c in nf.num.items():
            n = monom[vidx]
            rest = monom[:vidx] + (0,) + monom[vidx + 1:]
            coeff = poly_to_expr(nf.num.ring({rest: c}), conv.order)
            out.append(mul(coeff, power(v, n + 1), Num(1) / (n + 1)))
        den = nf.denominator(factored=True)
        return mul(add(*out), power(den, -1))
    U = parts.U
    out = []
    for (d,), c in parts.poly.items():
        out.append(mul(U.coeff_expr(c), power(v, d + 1), Num(1) / (d + 1)))
    for B, fu, fexpr, k in parts.terms:
        deg = fu.degree()
        if deg == 1:
            a = _coeff(fu, 1)
            lam = _div(U, _coeff(B, 0), a)
        else:
            a2, a1 = _coeff(fu, 2), _coeff(fu, 1)
            b1, b0 = _coeff(B, 1), _coeff(B, 0)
            if b1 == U.K.zero:
                raise NotIntegrable("quadratic factor needs an arctangent")
            lam = _div(U, b1, a2 * 2)
            if b0 != lam * a1:
                raise NotIntegrable("quadratic factor needs an arctangent")
        lam_e = U.coeff_expr(lam)
        if k == 1:
            out.append(mul(lam_e, log(fexpr)))
        else:
            out.append(mul(lam_e, Num(1) / (1 - k), power(fexpr, 1 - k)))
    return add(*out)


def _is_sqrt_of(a, v):
    return a.kind == POW and a.args[0] is v and a.args[1].kind == NUM and a.args[1].value.denominator == 2


# -- sqrt(v): substitute v = w^2 ----------------------------------------------------


def _sqrt_substitution(e, vname, v):
    wname = f"{vname}_w"
    w = Sym(wname)
    with assuming(positive=(wname,)):
        ew = mul(substitute(e, {vname: power(w, 2)}), 2, w)
        if any(_is_sqrt_of(a, w) for a in NormalForm(ew)._conv.order):
            raise NotIntegrable("nested square roots of the variable")
        Fw = integrate(ew, wname)
    return simplify(substitute(Fw, {wname: power(v, Fraction(1, 2))}))


# -- polynomials in log(L) ------------------------------------------------------------


def _log_poly(nf, vname, v, lg):
    L = lg.args[1]
    a = simplify(differentiate(L, vname))
    if vname in a.free or a is ZERO:
        raise NotIntegrable(f"log argument {L} is not linear in {vname}")
    b = simplify(add(L, mul(-1, a, v)))
    conv = nf._conv
    lidx = conv.order.index(lg)
    groups = {}
    for monom, c in nf.num.items():
        k = monom[lidx]
        rest = monom[:lidx] + (0,) + monom[lidx + 1:]
        groups[k] = groups.get(k, nf.num.ring.zero) + nf.num.ring({rest: c})
    den = nf.denominator(factored=True)
    uname = f"{vname}_u"
    u = Sym(uname)
    back = mul(add(u, mul(-1, b)), power(a, -1))
    out = []
    for k, P in sorted(groups.items()):
        ck = mul(poly_to_expr(P, conv.order), power(den, -1))
        if k == 0:
            out.append(integrate(ck, vname))
            continue
        cu = simplify(mul(substitute(ck, {vname: back}), power(a, -1)))
        for n, cn in _laurent(cu, uname, u):
            out.append(mul(cn, _int_power_log(n, k, u)))
    return simplify(substitute(add(*out), {uname: L}))


def _laurent(e, uname, u):
    """[(n, c_n)] with e = sum c_n u^n and u-free c_n, else NotIntegrable."""
    _nf, parts = apart_parts(e, uname)
    if parts is None:
        nf = NormalForm(e)
        conv = nf._conv
        if u not in conv.atoms:
            return [(0, e)]
        uidx = conv.atoms[u]
        den = nf.denominator(factored=True)
        terms = {}
        for monom, c in nf.num.items():
            n = monom[uidx]
            rest = monom[:uidx] + (0,) + monom[uidx + 1:]
            terms.setdefault(n, []).append(poly_to_expr(nf.num.ring({rest: c}), conv.order))
        return [(n, mul(add(*cs), power(den, -1))) for n, cs in terms.items()]
    U = parts.U
    out = [(d, U.coeff_expr(c)) for (d,), c in parts.poly.items()]
    for B, fu, fexpr, k in parts.terms:
        if fu.degree() != 1 or _coeff(fu, 0) != U.K.zero:
            raise NotIntegrable("logarithmic term over a factor other than its argument")
        scale = _div(U, _coeff(B, 0), _coeff(fu, 1) ** k)
        out.append((-k, U.coeff_expr(scale)))
    return out


def _int_power_log(n, k, u):
    """Antiderivative of u^n log(u)^k."""
    lu = log(u)
    if n == -1:
        return mul(Num(1) / (k + 1), power(lu, k + 1))
    terms = []
    fall = 1
    for j in range(k + 1):
        terms.append(mul(Num((-1) ** j * fall) / Num(n + 1) ** (j + 1), power(lu, k - j)))
        fall *= k - j
    return mul(power(u, n + 1), add(*terms))


def _coeff(U_poly, d):
    return dict(U_poly.items()).get((d,), U_poly.ring.domain.zero)


def _div(U, a, b):
    return U.K.quo(a, b)


# -- polynomial times trigonometric polynomial ---------------------------------


def _angle(theta: Expr, vname: str):
    """theta = omega*v + phi with v-free omega, phi."""
    omega = differentiate(theta, vname)
    if vname in omega.free:
        raise NotIntegrable(f"angle {theta} is not linear in {vname}")
    phi = simplify(add(theta, mul(-1, omega, Sym(vname))))
    return simplify(omega), phi


def _exp_sum_mul(a, b):
    out = {}
    for (w1, p1), c1 in a.items():
        for (w2, p2), c2 in b.items():
            key = (add(w1, w2), add(p1, p2))
            out[key] = add(out.get(key, ZERO), mul(c1, c2))
    return out


def _trig_poly(nf, vname, v):
    conv = nf._conv
    order = conv.order
    vidx = conv.atoms.get(v)
    angles = {}
    for k, a in enumerate(order):
        if a.kind == FN and a.args[0] in ("sin", "cos") and vname in a.free:
            angles[k] = (a.args[0],) + _angle(a.args[1], vname)
    total = []
    for monom, c in nf.num.items():
        n = monom[vidx] if vidx is not None else 0
        coeff = [Num(_frac(c))]
        expo = {(ZERO, ZERO): ONE}
        for k, ex in enumerate(monom):
            if not ex or k == vidx:
                continue
            if k in angles:
                name, omega, phi = angles[k]
                if name == "cos":
                    f = {(omega, phi): Num(1) / 2, (mul(-1, omega), mul(-1, phi)): Num(1) / 2}
                else:
                    h = mul(Num(1) / 2, power(I, -1))
                    f = {(omega, phi): h, (mul(-1, omega), mul(-1, phi)): mul(-1, h)}
                for _ in range(ex):
                    expo = _exp_sum_mul(expo, f)
            else:
                coeff.append(power(order[k], ex))
        cexpr = mul(*coeff)
        for (omega, phi), ce in expo.items():
            if ce is ZERO:
                continue
            total.append(mul(cexpr, ce, _int_monomial_exp(n, omega, phi, v)))
    result = mul(add(*total), power(nf.denominator(factored=True), -1))
    return simplify(result)


def _int_monomial_exp(n, omega, phi, v):
    """Antiderivative of v^n exp(i(omega v + phi))."""
    if omega is ZERO:
        return mul(power(v, n + 1), Num(1) / (n + 1), _cis(phi))
    a = mul(I, omega)
    terms = []
    for j in range(n + 1):
        c = Num((-1) ** j * factorial(n) // factorial(n - j))
        terms.append(mul(c, power(v, n - j), power(a, -(j + 1))))
    return mul(add(*terms), _cis(add(mul(omega, v), phi)))


def _cis(t):
    if t is ZERO:
        return ONE
    return add(cos(t), mul(I, sin(t)))
