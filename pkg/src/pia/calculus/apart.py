"""Partial fractions with respect to one variable.

The denominator of the normal form is factored over QQ[atoms]; every factor
must have degree <= 2 in the variable.  The decomposition itself runs over
univariate polynomials whose coefficients live in the fraction field of the
remaining atoms.
"""

from __future__ import annotations

from sympy.polys.domains import QQ
from sympy.polys.rings import PolyRing
from sympy.polys.orderings import lex

from ..errors import FactorizationOutOfScope
from ..expr import ONE, ZERO, Expr, Num, Sym, add, as_expr, mul, power
from .normal import NormalForm, _frac

MAX_FACTOR_DEGREE = 2


def poly_to_expr(P, atoms) -> Expr:
    """Expand a PolyElement into an Expr; atoms[k] is the k-th ring generator."""
    terms = []
    for monom, coeff in P.items():
        fs = [Num(_frac(coeff))]
        for k, ex in enumerate(monom):
            if ex:
                fs.append(power(atoms[k], ex))
        terms.append(mul(*fs))
    return add(*terms)


def factored_poly_expr(P, atoms) -> Expr:
    if P.is_zero:
        return ZERO
    if P.is_ground:
        return Num(_frac(P.LC))
    content, facs = P.factor_list()
    parts = [Num(_frac(content))]
    for f, m in facs:
        parts.append(power(poly_to_expr(f, atoms), m))
    return mul(*parts)


class _Univariate:
    """Conversion between the normal-form ring and K[v], K = QQ(other atoms)."""

    def __init__(self, R, atoms, vidx):
        self.R = R
        self.vidx = vidx
        self.others = [k for k in range(len(atoms)) if k != vidx]
        self.other_atoms = [atoms[k] for k in self.others]
        n = max(len(self.others), 1)
        self.Rc = PolyRing([f"c{k}" for k in range(n)], QQ, lex)
        self.K = self.Rc.to_field().to_domain()
        self.Kv = PolyRing(["v"], self.K, lex)

    def to_uni(self, P):
        coeffs = {}
        for monom, c in P.items():
            d = monom[self.vidx]
            rest = tuple(monom[k] for k in self.others) or (0,)
            coeffs.setdefault(d, {})[rest] = c
        out = self.Kv.zero
        v = self.Kv.gens[0]
        for d, terms in coeffs.items():
            cpoly = self.Rc.from_dict(terms)
            out += self.Kv(self.K.new(cpoly)) * v**d if d else self.Kv(self.K.new(cpoly))
        return out

    def coeff_expr(self, c) -> Expr:
        num = c.numer if hasattr(c, "numer") else c.element.numer
        den = c.denom if hasattr(c, "denom") else c.element.denom
        atoms = self.other_atoms or [ONE]
        n = poly_to_expr(num, atoms)
        d = factored_poly_expr(den, atoms)
        return mul(n, power(d, -1))

    def uni_expr(self, U, v: Expr) -> Expr:
        terms = []
        for (d,), c in U.items():
            terms.append(mul(self.coeff_expr(c), power(v, d)))
        return add(*terms)


class _Parts:
    """Polynomial part plus terms B/f^k (B, f univariate, deg B < deg f)."""

    def __init__(self, nf, U, poly, terms, v):
        self.nf = nf
        self.U = U
        self.poly = poly
        self.terms = terms      # list of (B, fu, fexpr, k)
        self.v = v

    def to_expr(self) -> Expr:
        U, v = self.U, self.v
        out = [U.uni_expr(self.poly, v)] if not self.poly.is_zero else []
        for B, _fu, fexpr, k in self.terms:
            out.append(mul(U.uni_expr(B, v), power(fexpr, -k)))
        return add(*out)


def apart_parts(e, var):
    """Decompose e; returns None when the denominator is free of var."""
    e = as_expr(e)
    vname = var if isinstance(var, str) else var.name
    v = Sym(vname)
    nf = NormalForm(e)
    conv = nf._conv
    if nf.is_zero() or v not in conv.atoms or nf.den.degree(conv.atoms[v]) <= 0:
        return nf, None
    atoms = conv.order
    vidx = conv.atoms[v]
    content, facs = nf.den.factor_list()
    for f, _m in facs:
        if f.degree(vidx) > MAX_FACTOR_DEGREE:
            raise FactorizationOutOfScope(
                f"denominator factor of degree {f.degree(vidx)} in {vname}",
                together=nf.to_expr(factor_numerator=False),
            )
    # orient each factor so its leading coefficient in v starts positive
    oriented = []
    for f, m in facs:
        d = f.degree(vidx)
        if d > 0:
            lead = [c for mon, c in f.terms() if mon[vidx] == d][0]
            if lead < 0:
                f = -f
                if m % 2:
                    content = -content
        oriented.append((f, m))
    facs = oriented
    U = _Univariate(conv.R, atoms, vidx)
    scale = U.K.convert(content) if content != 1 else U.K.one
    vfacs = []
    for f, m in facs:
        if f.degree(vidx) == 0:
            scale = scale * U.to_uni(f).LC ** m
        else:
            vfacs.append((U.to_uni(f), f, m))
    N = U.to_uni(nf.num).quo_ground(scale)
    D = U.Kv.one
    for fu, _f, m in vfacs:
        D = D * fu**m
    q, r = N.div(D)
    terms = []
    for j, (fu, f, m) in enumerate(vfacs):
        P = fu**m
        rest = U.Kv.one
        for k, (gu, _g, mk) in enumerate(vfacs):
            if k != j:
                rest = rest * gu**mk
        s, _t, h = rest.gcdex(P)
        # h is a unit, so r/(rest*P) has numerator r*rest^{-1} mod P over P
        A = (r * s).quo_ground(h.LC).rem(P)
        fexpr = poly_to_expr(f, atoms)
        # f-adic expansion: A/f^m = B_m/f^m + B_{m-1}/f^{m-1} + ...
        k = m
        while not A.is_zero and k > 0:
            A, B = A.div(fu)
            if not B.is_zero:
                terms.append((B, fu, fexpr, k))
            k -= 1
    return nf, _Parts(nf, U, q, terms, v)


def apart(e, var) -> Expr:
    """Partial-fraction form of e with respect to the symbol var."""
    nf, parts = apart_parts(e, var)
    if parts is None:
        return nf.to_expr(factor_numerator=False)
    return parts.to_expr()
