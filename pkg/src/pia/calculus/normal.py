"""Rational-trig normal form.

An expression is mapped to a fraction N/D of polynomials over QQ whose
variables are the expression's atoms.  Three kinds of atom are *algebraic
generators*, kept to degree <= 1 by reducing with their square:

* ``i``           with ``i^2 = -1``
* ``sin(t)``      with ``sin(t)^2 = 1 - cos(t)^2``
* ``sqrt(u)``     with ``sqrt(u)^2 = u``

Denominators are rationalized (conjugate in each generator, outermost first)
so D is generator-free, then N/D is cancelled by its polynomial gcd and D is
made monic.  Within the class this gives a decidable zero test: the value is
zero iff N is the zero polynomial.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from fractions import Fraction
from math import gcd as igcd

from sympy.polys.domains import QQ
from sympy.polys.orderings import lex
from sympy.polys.rings import PolyRing

from ..expr import (
    ADD, FN, IMAG, MUL, NUM, POW, SYM, UFN,
    HALF, I, ONE, ZERO, Expr, Num, _make, add, as_expr, children, cos, evaluate, fn,
    mul, power, rebuild, sin, split_coeff, walk,
)

_rings = {}

# polynomials with more terms than this are not factored for display
FACTOR_TERM_LIMIT = 400


def _ring(n):
    r = _rings.get(n)
    if r is None:
        r = PolyRing([f"v{k}" for k in range(max(n, 1))], QQ, lex)
        _rings[n] = r
    return r


def _frac(c) -> Fraction:
    return Fraction(int(c.numerator), int(c.denominator))


# -- trig preparation ------------------------------------------------------


def _rational_gcd(a: Fraction, b: Fraction) -> Fraction:
    return Fraction(igcd(a.numerator * b.denominator, b.numerator * a.denominator),
                    a.denominator * b.denominator)


def _angle_bases(e: Expr):
    """For each angle 'rest', the rational gcd of the multiples used with it."""
    bases = {}

    def note(arg):
        terms = arg.args if arg.kind == ADD else (arg,)
        for t in terms:
            c, rest = split_coeff(t)
            if rest is ONE:
                continue
            c = abs(c)
            bases[rest] = c if rest not in bases else _rational_gcd(bases[rest], c)

    for node in walk(e):
        if node.kind == FN and node.args[0] in ("sin", "cos", "tan"):
            note(node.args[1])
    return bases


def _sc(arg: Expr, bases) -> tuple:
    """(sin(arg), cos(arg)) in terms of base angles, as Exprs."""
    if arg.kind == ADD:
        s1, c1 = _sc(arg.args[0], bases)
        rest = add(*arg.args[1:])
        s2, c2 = _sc(rest, bases)
        return add(mul(s1, c2), mul(c1, s2)), add(mul(c1, c2), mul(-1, s1, s2))
    c, rest = split_coeff(arg)
    if rest is ONE:
        return sin(arg), cos(arg)
    g = bases.get(rest)
    if g is None or g == 0:
        return sin(arg), cos(arg)
    n = c / g
    if n.denominator != 1:
        return sin(arg), cos(arg)
    n = int(n)
    base = mul(Num(g), rest)
    sb, cb = sin(base), cos(base)
    sign = 1
    if n < 0:
        n, sign = -n, -1
    s, co = ZERO, ONE
    # fold the angle-addition formula n times (n is small in practice)
    for _ in range(n):
        s, co = add(mul(s, cb), mul(co, sb)), add(mul(co, cb), mul(-1, s, sb))
    return mul(sign, s), co


def _prep_trig(e: Expr, bases=None) -> Expr:
    """Rewrite tan, sums of angles and integer multiples of a common base angle
    into sin/cos of base angles."""
    if bases is None:
        bases = _angle_bases(e)
    memo = {}
    for node in walk(e):
        k = node.kind
        if k == FN and node.args[0] in ("sin", "cos", "tan"):
            arg = memo[node.args[1]]
            s, c = _sc(arg, bases)
            name = node.args[0]
            memo[node] = s if name == "sin" else c if name == "cos" else mul(s, power(c, -1))
        elif k in (ADD, MUL, POW, FN, UFN):
            ch = [memo[a] for a in children(node)]
            memo[node] = rebuild(node, ch)
        else:
            memo[node] = node
    return memo[e]


# -- the converter -----------------------------------------------------------


@dataclass
class _Gen:
    expr: Expr          # the atom as an expression (i, sin(t), u^(1/2))
    index: int
    square: Expr        # value of the square, as an expression
    depth: int = 0
    sq: tuple = None    # (num, den) ring elements of the square


def _root_of(node: Expr):
    """For b^(p/q) (q > 1) the node b^(1/q), else None."""
    b, x = node.args
    if x.kind != NUM or x.value.denominator == 1:
        return None
    return _make(POW, (b, Num(Fraction(1, x.value.denominator))))


def _walk_until(e: Expr, stop):
    """Post-order traversal that does not descend below nodes in ``stop``."""
    seen = set()
    out = []
    stack = [(e, False)]
    while stack:
        node, done = stack.pop()
        if done:
            out.append(node)
            continue
        if node in seen:
            continue
        seen.add(node)
        stack.append((node, True))
        if node in stop:
            continue
        for c in children(node):
            if c not in seen:
                stack.append((c, False))
    return out


class _Converter:
    """Collect atoms of several expressions, then convert them in one ring."""

    def __init__(self):
        self.atoms = {}     # Expr -> index   (free atoms)
        self.gens = {}      # Expr -> _Gen
        self.order = []     # index -> Expr
        self.nonrigorous = False
        self.bases = {}
        self._lower_memo = {}

    # phase A ----------------------------------------------------------------
    def _atom(self, a: Expr):
        if a not in self.atoms and a not in self.gens:
            self.atoms[a] = len(self.order)
            self.order.append(a)

    def _gen(self, a: Expr, square: Expr):
        if a in self.gens:
            return
        inner = 0
        for node in walk(square):
            h = self.gens.get(node)
            if h is not None:
                inner = max(inner, h.depth)
        g = _Gen(a, len(self.order), square, inner + (1 if a.kind == POW else 0))
        self.gens[a] = g
        self.order.append(a)

    def lower(self, e: Expr) -> Expr:
        """Canonicalize atom arguments and register atoms; returns the lowered
        expression (same value) whose atoms are all registered."""
        r = self._lower_once(e)
        for _ in range(4):
            if self._registered(r):
                return r
            r = self._lower_once(r)
        if not self._registered(r):
            raise AssertionError(f"could not lower {e}")
        return r

    def _registered(self, e: Expr) -> bool:
        known = self.atoms.keys() | self.gens.keys()
        for node in _walk_until(e, known):
            k = node.kind
            if k in (SYM, UFN, FN) and node not in self.atoms and node not in self.gens:
                return False
            if k == IMAG and node not in self.gens:
                return False
            if k == POW and not (node.args[1].kind == NUM and node.args[1].value.denominator == 1) \
                    and node not in self.atoms and node not in self.gens:
                root = _root_of(node)
                if root is None or (root not in self.atoms and root not in self.gens):
                    return False
        return True

    def _lower_once(self, e: Expr) -> Expr:
        new_bases = _angle_bases(e)
        for rest, g in new_bases.items():
            old = self.bases.get(rest)
            if old is None:
                self.bases[rest] = g
            else:
                merged = _rational_gcd(old, g)
                if merged != old:
                    self.nonrigorous = True
                self.bases[rest] = merged
        e = _prep_trig(e, self.bases)
        memo = self._lower_memo
        for node in walk(e):
            if node in memo:
                continue
            k = node.kind
            if k == NUM:
                memo[node] = node
            elif k == IMAG:
                self._gen(I, Num(-1))
                memo[node] = node
            elif k in (SYM, UFN):
                self._atom(node)
                memo[node] = node
            elif k == ADD:
                memo[node] = add(*(memo[a] for a in node.args))
            elif k == MUL:
                memo[node] = mul(*(memo[a] for a in node.args))
            elif k == FN:
                name, arg = node.args
                a = fn(name, _simplify_arg(memo[arg]))
                if a.kind != FN:
                    memo[node] = self._lower_once(a)
                elif name == "cos":
                    self._atom(a)
                    memo[node] = a
                elif name == "sin":
                    c = cos(a.args[1])
                    self._atom(c)
                    self._gen(a, add(1, mul(-1, power(c, 2))))
                    memo[node] = a
                elif name == "tan":
                    memo[node] = self._lower_once(mul(sin(a.args[1]), power(cos(a.args[1]), -1)))
                else:
                    self.nonrigorous = True
                    self._atom(a)
                    memo[node] = a
            elif k == POW:
                b, x = node.args
                b2 = memo[b]
                if x.kind == NUM:
                    n = x.value
                    if n.denominator == 1:
                        memo[node] = power(b2, x)
                    elif n.denominator == 2:
                        rad = _simplify_arg(b2)
                        r = power(rad, HALF)
                        if r.kind == POW and r.args[1] is HALF:
                            lrad = self.lower(rad)
                            self._gen(r, lrad)
                            memo[node] = power(r, n.numerator)
                        else:
                            memo[node] = self._lower_once(power(r, n.numerator))
                    else:
                        self.nonrigorous = True
                        rad = _simplify_arg(b2)
                        r = power(rad, Num(Fraction(1, n.denominator)))
                        if r.kind == POW:
                            self._atom(r)
                            memo[node] = power(r, n.numerator)
                        else:
                            memo[node] = self._lower_once(power(r, n.numerator))
                else:
                    self.nonrigorous = True
                    a = power(_simplify_arg(b2), _simplify_arg(memo[x]))
                    if a.kind == POW and a.args[1].kind != NUM:
                        self._atom(a)
                        memo[node] = a
                    else:
                        memo[node] = self._lower_once(a)
            else:
                memo[node] = node
        return memo[e]

    # phase B ----------------------------------------------------------------
    def build(self):
        self.R = _ring(len(self.order))
        gens = self.R.gens
        self.var = {a: gens[k] for a, k in self.atoms.items()}
        for a, g in self.gens.items():
            self.var[a] = gens[g.index]
        self._conv_memo = {}
        pending = list(self.gens.values())
        for g in pending:
            g.sq = None
        self.gen_order = sorted(pending, key=lambda g: (-g.depth, g.index))
        if sum(1 for g in pending if g.expr.kind == POW) > 1 or any(g.depth > 1 for g in pending):
            self.nonrigorous = True
        # innermost squares first: converting a square only reduces deeper generators
        for g in sorted(pending, key=lambda g: (g.depth, g.index)):
            g.sq = self._convert_raw(g.square)
        self._conv_memo = {}

    def reduce(self, P):
        """Bring every generator to degree <= 1; returns (num, den)."""
        R = self.R
        den = R.one
        for g in self.gen_order:
            idx = g.index
            if P.degree(idx) <= 1:
                continue
            un, ud = g.sq
            buckets = {}
            for monom, coeff in P.items():
                k = monom[idx]
                m2 = monom[:idx] + (k % 2,) + monom[idx + 1:]
                buckets.setdefault(k // 2, {})[m2] = coeff
            J = max(buckets)
            upow = [R.one]
            for _ in range(J):
                upow.append(upow[-1] * un)
            dpow = [R.one]
            if ud != R.one:
                for _ in range(J):
                    dpow.append(dpow[-1] * ud)
            acc = R.zero
            for j, terms in buckets.items():
                part = R.from_dict(terms)
                if ud == R.one:
                    acc += part * upow[j]
                else:
                    acc += part * upow[j] * dpow[J - j]
            P = acc
            if ud != R.one:
                den = den * dpow[J]
        return P, den

    def _cancel(self, n, d):
        if d.is_zero:
            raise ZeroDivisionError("division by an expression that simplifies to 0")
        if n.is_zero:
            return self.R.zero, self.R.one
        n, d = n.cancel(d)
        lc = d.LC
        if lc != 1:
            n = n.quo_ground(lc)
            d = d.quo_ground(lc)
        return n, d

    def rationalize(self, n, d):
        for g in self.gen_order:
            idx = g.index
            if d.degree(idx) < 1:
                continue
            conj = d.subs(self.R.gens[idx], 0) * 2 - d  # A - B*t from A + B*t
            n2, dn = self.reduce(n * conj)
            d2, dd = self.reduce(d * conj)
            n, d = n2 * dd, d2 * dn
        return n, d

    def _convert_raw(self, e: Expr):
        memo = self._conv_memo
        R = self.R
        for node in _walk_until(e, self.var):
            if node in memo:
                continue
            k = node.kind
            if k == NUM:
                v = node.value
                memo[node] = (R(QQ(v.numerator, v.denominator)), R.one)
            elif node in self.var:
                memo[node] = (self.var[node], R.one)
            elif k == ADD:
                memo[node] = self._sum([memo[a] for a in node.args])
            elif k == MUL:
                acc = memo[node.args[0]]
                for a in node.args[1:]:
                    acc = self._mul(acc, memo[a])
                memo[node] = acc
            elif k == POW:
                b, x = node.args
                if x.kind == NUM and x.value.denominator == 1:
                    memo[node] = self._pow(memo[b], int(x.value))
                elif node in self.var:
                    memo[node] = (self.var[node], R.one)
                elif _root_of(node) in self.var:
                    memo[node] = self._pow((self.var[_root_of(node)], R.one), x.value.numerator)
                else:
                    raise AssertionError(f"unlowered power {node}")
            else:
                raise AssertionError(f"unregistered atom {node}")
        return memo[e]

    def _sum(self, parts):
        R = self.R
        dens = {}
        for n, d in parts:
            dens.setdefault(d, []).append(n)
        if len(dens) == 1:
            (d, ns), = dens.items()
            total = R.zero
            for n in ns:
                total += n
            return self._cancel(total, d) if d != R.one else (total, d)
        L = R.one
        for d in dens:
            if d == R.one:
                continue
            g = L.gcd(d)
            L = L * d.exquo(g) if g != R.one else L * d
        total = R.zero
        for d, ns in dens.items():
            s = R.zero
            for n in ns:
                s += n
            total += s * L.exquo(d) if d != L else s
        return self._cancel(total, L)

    def _mul(self, a, b):
        n1, d1 = a
        n2, d2 = b
        R = self.R
        if n1.is_zero or n2.is_zero:
            return R.zero, R.one
        n = n1 * n2
        d = d1 * d2
        n, dn = self.reduce(n)
        if dn != R.one:
            d = d * dn
        if d == R.one:
            return n, d
        return self._cancel(n, d)

    def _inv(self, a):
        n, d = a
        if n.is_zero:
            raise ZeroDivisionError("division by an expression that simplifies to 0")
        n2, d2 = self.rationalize(d, n)
        return self._cancel(n2, d2)

    def _pow(self, a, k):
        R = self.R
        if k < 0:
            a = self._inv(a)
            k = -k
        result = (R.one, R.one)
        base = a
        while k:
            if k & 1:
                result = self._mul(result, base)
            k >>= 1
            if k:
                base = self._mul(base, base)
        return result

    def convert(self, e: Expr):
        return self._convert_raw(self.lower(e))

    # back to expressions --------------------------------------------------
    def poly_expr(self, P) -> Expr:
        atoms = self.order
        terms = []
        for monom, coeff in P.items():
            fs = [Num(_frac(coeff))]
            for k, ex in enumerate(monom):
                if ex:
                    fs.append(power(atoms[k], ex))
            terms.append(mul(*fs))
        return add(*terms)

    def factored_expr(self, P) -> Expr:
        c, parts = self.parts(P, factored=True)
        return mul(Num(c), *(power(f, m) for f, m in parts))

    def parts(self, P, factored=True):
        """(rational content, [(factor Expr, multiplicity)]) with each factor's
        first term (in canonical order) positive."""
        if P.is_zero:
            return Fraction(0), []
        if P.is_ground:
            return _frac(P.LC), []
        if factored and len(P) <= FACTOR_TERM_LIMIT:
            content, facs = P.factor_list()
            content = _frac(content)
        else:
            content, prim = P.primitive()
            content = _frac(content)
            facs = [(prim, 1)]
        out = []
        for f, m in facs:
            e = self.poly_expr(f)
            if split_coeff(_leading_term(e))[0] < 0:
                e = self.poly_expr(-f)
                if m % 2:
                    content = -content
            out.append((e, m))
        return content, out


def _term_degree(t: Expr) -> int:
    deg = 0
    for f in (t.args if t.kind == MUL else (t,)):
        if f.kind in (NUM, IMAG):
            continue
        if f.kind == POW and f.args[1].kind == NUM and f.args[1].value.denominator == 1:
            deg += int(f.args[1].value)
        else:
            deg += 1
    return deg


def _leading_term(e: Expr) -> Expr:
    """Highest-degree term, earliest in canonical order among ties."""
    if e.kind != ADD:
        return e
    best = e.args[0]
    bd = _term_degree(best)
    for t in e.args[1:]:
        d = _term_degree(t)
        if d > bd:
            best, bd = t, d
    return best


def _simplify_arg(e: Expr) -> Expr:
    """Canonical form used inside atoms (function arguments, radicands)."""
    if e.kind in (NUM, SYM) or (e.kind == MUL and all(a.kind in (NUM, SYM) for a in e.args)):
        return e
    return simplify(e)


# -- public API --------------------------------------------------------------


class NormalForm:
    """N/D over QQ[atoms] with algebraic generators reduced (see module doc)."""

    def __init__(self, e):
        self.source = as_expr(e)
        conv = _Converter()
        lowered = conv.lower(self.source)
        conv.build()
        self.num, self.den = conv._convert_raw(lowered)
        self._conv = conv
        self.nonrigorous = conv.nonrigorous

    def is_zero(self) -> bool:
        return self.num.is_zero

    @property
    def atoms(self):
        return tuple(self._conv.order)

    @property
    def generators(self):
        return tuple(g.expr for g in self._conv.gens.values())

    def numerator(self, factored=False) -> Expr:
        c = self._conv
        return c.factored_expr(self.num) if factored else c.poly_expr(self.num)

    def denominator(self, factored=True) -> Expr:
        c = self._conv
        return c.factored_expr(self.den) if factored else c.poly_expr(self.den)

    def to_expr(self, factor_numerator=True) -> Expr:
        if self.num.is_zero:
            return ZERO
        conv = self._conv
        cn, nparts = conv.parts(self.num, factored=factor_numerator)
        cd, dparts = conv.parts(self.den, factored=True)
        c = cn / cd
        if not dparts:
            if not nparts:
                return Num(c)
            if len(nparts) == 1 and nparts[0][1] == 1:
                return mul(Num(c), nparts[0][0]) if nparts[0][0].kind != ADD else \
                    add(*(mul(Num(c), t) for t in nparts[0][0].args))
        c, nparts, dparts = _sin_squares(c, nparts, dparts)
        factors = [power(f, m) for f, m in nparts] + [power(f, -m) for f, m in dparts]
        return mul(Num(c), *factors)


def _cos_pm_one(f: Expr):
    """(angle, +1 or -1) when f is cos(t) + 1 or cos(t) - 1."""
    if f.kind == ADD and len(f.args) == 2 and f.args[0].kind == NUM \
            and f.args[0].value in (1, -1) and f.args[1].kind == FN and f.args[1].args[0] == "cos":
        return f.args[1].args[1], int(f.args[0].value)
    return None


def _sin_squares(c, nparts, dparts):
    """Display rewrite (cos t - 1)(cos t + 1) -> -sin(t)^2, then cancel a
    numerator sin(t) against a denominator sin(t)^2."""

    def fold(parts, c):
        pm = {}
        for idx, (f, m) in enumerate(parts):
            hit = _cos_pm_one(f)
            if hit is not None:
                pm.setdefault(hit[0], {})[hit[1]] = idx
        drop = set()
        extra = []
        for t, sides in pm.items():
            if 1 in sides and -1 in sides:
                ip, im_ = sides[1], sides[-1]
                k = min(parts[ip][1], parts[im_][1])
                if k % 2:
                    c = -c
                extra.append((sin(t), 2 * k))
                parts[ip] = (parts[ip][0], parts[ip][1] - k)
                parts[im_] = (parts[im_][0], parts[im_][1] - k)
        parts = [(f, m) for f, m in parts if m > 0] + extra
        return parts, c

    nparts = list(nparts)
    dparts = list(dparts)
    nparts, c = fold(nparts, c)
    dparts, c2 = fold(dparts, Fraction(1))
    c = c / c2 if c2 != 1 else c
    dsin = {f: j for j, (f, m) in enumerate(dparts) if f.kind == FN and f.args[0] == "sin"}
    for j, (f, m) in enumerate(nparts):
        if f in dsin:
            k = dsin[f]
            common = min(m, dparts[k][1])
            nparts[j] = (f, m - common)
            dparts[k] = (f, dparts[k][1] - common)
    nparts = [(f, m) for f, m in nparts if m > 0]
    dparts = [(f, m) for f, m in dparts if m > 0]
    return c, nparts, dparts


_simplify_cache = {}


def simplify_flagged(e):
    """Return (simplified expression, nonrigorous flag)."""
    e = as_expr(e)
    hit = _simplify_cache.get((e, _assumption_key()))
    if hit is not None:
        return hit
    if e.kind in (NUM, SYM, IMAG):
        out = (e, False)
    else:
        nf = NormalForm(e)
        out = (nf.to_expr(factor_numerator=True), nf.nonrigorous and not nf.is_zero())
    _simplify_cache[(e, _assumption_key())] = out
    return out


def _assumption_key():
    from ..expr import current_assumptions

    return current_assumptions().positive


def simplify(e) -> Expr:
    """Normal-form driven simplification (fixed pipeline, no search)."""
    return simplify_flagged(e)[0]


def factor(e) -> Expr:
    return simplify(e)


def together(e) -> Expr:
    """Single fraction: expanded numerator over factored denominator."""
    e = as_expr(e)
    if e.kind in (NUM, SYM, IMAG):
        return e
    return NormalForm(e).to_expr(factor_numerator=False)


def _random_function(rng):
    coeffs = [complex(rng.uniform(-1, 1), 0) for _ in range(9)]

    def f(t, order):
        total = 0j
        for j in range(order, len(coeffs)):
            fall = 1
            for q in range(order):
                fall *= j - q
            total += coeffs[j] * fall * t ** (j - order)
        return total + (0.5 ** order) * __import__("cmath").exp(0.5 * t)

    return f


def numeric_zero(e, points=20, tol=1e-10, seed=0) -> bool:
    """Randomized zero test: |e| small relative to its terms at random points."""
    from ..expr import functions_in

    e = as_expr(e)
    rng = random.Random(seed)
    syms = sorted(e.free)
    funcs = sorted(functions_in(e))
    terms = e.args if e.kind == ADD else (e,)
    tried = 0
    attempts = 0
    while tried < points and attempts < points * 5:
        attempts += 1
        env = {s: rng.uniform(0.3, 2.7) for s in syms}
        fdefs = {f: _random_function(rng) for f in funcs}
        try:
            val = evaluate(e, env, fdefs)
            scale = max(abs(evaluate(t, env, fdefs)) for t in terms)
        except (ZeroDivisionError, OverflowError, ValueError):
            continue
        tried += 1
        if abs(val) > tol * max(scale, 1e-300) and abs(val) > 1e-300:
            return False
    return tried > 0


def zero_test(e):
    """(is_zero, rigorous).  Exact when the normal form numerator vanishes."""
    nf = NormalForm(e)
    if nf.is_zero():
        return True, True
    if not nf.nonrigorous:
        return False, True
    return numeric_zero(e), False


def is_zero(e) -> bool:
    return zero_test(e)[0]


def expand(e) -> Expr:
    """Distribute products over sums and expand positive integer powers."""
    e = as_expr(e)
    memo = {}
    for node in walk(e):
        k = node.kind
        if k == ADD:
            memo[node] = add(*(memo[a] for a in node.args))
        elif k == MUL:
            acc = [ONE]
            for a in node.args:
                a2 = memo[a]
                terms = a2.args if a2.kind == ADD else (a2,)
                acc = [mul(x, t) for x in acc for t in terms] if len(terms) > 1 else [mul(x, a2) for x in acc]
            memo[node] = add(*acc)
        elif k == POW:
            b, x = memo[node.args[0]], node.args[1]
            if b.kind == ADD and x.kind == NUM and x.value.denominator == 1 and x.value > 1:
                # multiply term lists: mul(b, b) would fold back into b^2
                r = b
                for _ in range(int(x.value) - 1):
                    rt = r.args if r.kind == ADD else (r,)
                    r = add(*(expand(mul(s, t)) for s in rt for t in b.args))
                memo[node] = r
            else:
                memo[node] = power(b, x)
        elif k in (FN, UFN):
            from ..expr import rebuild

            memo[node] = rebuild(node, [memo[node.args[1]]])
        else:
            memo[node] = node
    return memo[e]


def trig_expand(e) -> Expr:
    """Rewrite into sin/cos of base angles with sin-degree <= 1, expanded."""
    e = _prep_trig(as_expr(e))

    def reduce_sin(node):
        if node.kind == POW and node.args[0].kind == FN and node.args[0].args[0] == "sin":
            x = node.args[1]
            if x.kind == NUM and x.value.denominator == 1 and x.value >= 2:
                n = int(x.value)
                c = cos(node.args[0].args[1])
                return mul(power(node.args[0], n % 2), power(add(1, mul(-1, c, c)), n // 2))
        return node

    from ..expr import map_bottom_up

    return expand(map_bottom_up(e, reduce_sin))
