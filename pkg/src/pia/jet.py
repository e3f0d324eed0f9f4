"""Truncated Taylor series ("jets") at a point.

A Jet holds c_0..c_K with f(x0 + h) = sum c_k h^k + O(h^(K+1)).  Every
operation truncates to the smaller order of its operands, so composing
operations gives the Taylor coefficients of the composed function.  The
arithmetic runs in complex doubles or, through ``MpContext``, in mpmath
with a chosen precision.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction

import mpmath

from .errors import SingularPoint, UnboundSymbol
from .expr import FN, IMAG, MUL, NUM, POW, SYM, UFN, ADD, as_expr, walk

DEFAULT_FLOOR = 1e-12


# -- scalar backends -----------------------------------------------------------


class ComplexContext:
    """Complex double precision."""

    name = "complex"

    def const(self, v):
        if isinstance(v, Fraction):
            return complex(v.numerator / v.denominator)
        return complex(v)

    @staticmethod
    def clean(z):
        # a -0.0 imaginary part would put sqrt/log on the wrong side of the cut
        return complex(z.real, 0.0) if z.imag == 0 else z

    def sqrt(self, z):
        return cmath.sqrt(self.clean(z))

    def log(self, z):
        return cmath.log(self.clean(z))

    def exp(self, z):
        return cmath.exp(z)

    def sin(self, z):
        return cmath.sin(z)

    def cos(self, z):
        return cmath.cos(z)

    def power(self, z, n: Fraction):
        if n.denominator == 1:
            return z ** int(n)
        if n.denominator == 2:
            return self.sqrt(z) ** n.numerator
        return cmath.exp(float(n) * self.log(z))

    def conj(self, z):
        return z.conjugate()

    def to_complex(self, z):
        return complex(z)


class MpContext(ComplexContext):
    """mpmath complex numbers; callers set the working precision."""

    name = "mpmath"

    def __init__(self, dps=40):
        self.dps = dps

    def const(self, v):
        if isinstance(v, Fraction):
            return mpmath.mpc(mpmath.mpf(v.numerator) / v.denominator)
        return mpmath.mpc(v)

    @staticmethod
    def clean(z):
        z = mpmath.mpc(z)
        return mpmath.mpc(z.real, 0) if z.imag == 0 else z

    def sqrt(self, z):
        return mpmath.sqrt(self.clean(z))

    def log(self, z):
        return mpmath.log(self.clean(z))

    def exp(self, z):
        return mpmath.exp(z)

    def sin(self, z):
        return mpmath.sin(z)

    def cos(self, z):
        return mpmath.cos(z)

    def power(self, z, n: Fraction):
        if n.denominator == 1:
            return mpmath.mpc(z) ** int(n)
        if n.denominator == 2:
            return self.sqrt(z) ** n.numerator
        return mpmath.exp(self.const(n) * self.log(z))

    def conj(self, z):
        return mpmath.conj(z)

    def to_complex(self, z):
        return complex(z)


COMPLEX = ComplexContext()


# -- the jet type --------------------------------------------------------------


class Jet:
    __slots__ = ("c", "x0", "ctx", "floor")

    def __init__(self, coeffs, x0=0.0, ctx=COMPLEX, floor=DEFAULT_FLOOR):
        self.c = list(coeffs)
        self.x0 = x0
        self.ctx = ctx
        self.floor = floor

    # construction helpers
    @classmethod
    def constant(cls, value, order, x0=0.0, ctx=COMPLEX, floor=DEFAULT_FLOOR):
        zero = ctx.const(0)
        return cls([ctx.const(value)] + [zero] * order, x0, ctx, floor)

    @classmethod
    def variable(cls, x0, order, ctx=COMPLEX, floor=DEFAULT_FLOOR):
        c = [ctx.const(x0)] + [ctx.const(0)] * order
        if order >= 1:
            c[1] = ctx.const(1)
        return cls(c, x0, ctx, floor)

    def _new(self, coeffs):
        return Jet(coeffs, self.x0, self.ctx, self.floor)

    def _lift(self, other):
        if isinstance(other, Jet):
            return other
        return Jet.constant(other, self.order, self.x0, self.ctx, self.floor)

    @property
    def order(self):
        return len(self.c) - 1

    @property
    def value(self):
        return self.c[0]

    def derivative_value(self, k):
        """f^(k)(x0)."""
        return self.c[k] * math.factorial(k)

    def truncate(self, order):
        return self._new(self.c[: order + 1])

    def __repr__(self):
        return f"Jet(x0={self.x0}, {self.c})"

    # arithmetic
    def __neg__(self):
        return self._new([-a for a in self.c])

    def __add__(self, other):
        o = self._lift(other)
        n = min(self.order, o.order)
        return self._new([self.c[k] + o.c[k] for k in range(n + 1)])

    __radd__ = __add__

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) + (-self)

    def __mul__(self, other):
        if not isinstance(other, Jet):
            v = self.ctx.const(other) if isinstance(other, Fraction) else other
            return self._new([a * v for a in self.c])
        n = min(self.order, other.order)
        a, b = self.c, other.c
        return self._new([sum(a[j] * b[k - j] for j in range(k + 1)) for k in range(n + 1)])

    __rmul__ = __mul__

    def _check(self, what):
        if abs(self.c[0]) <= self.floor:
            raise SingularPoint(f"{what} at a point where the value is {self.ctx.to_complex(self.c[0])}")

    def reciprocal(self):
        self._check("division")
        f = self.c
        h = [1 / f[0]]
        for k in range(1, len(f)):
            h.append(-sum(f[j] * h[k - j] for j in range(1, k + 1)) / f[0])
        return self._new(h)

    def __truediv__(self, other):
        if not isinstance(other, Jet):
            return self * (1 / self.ctx.const(other))
        return self * other.reciprocal()

    def __rtruediv__(self, other):
        return self._lift(other) * self.reciprocal()

    def __pow__(self, n):
        n = Fraction(n)
        if n.denominator == 1:
            return self._int_power(int(n))
        return jpow(self, n)

    def _int_power(self, n):
        if n < 0:
            return self.reciprocal()._int_power(-n)
        out = Jet.constant(1, self.order, self.x0, self.ctx, self.floor)
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def deriv(self, k=1):
        out = self
        for _ in range(k):
            out = self._new([j * out.c[j] for j in range(1, len(out.c))] or [self.ctx.const(0)])
        return out

    def conj(self):
        """Series of the complex conjugate function along a real axis."""
        return self._new([self.ctx.conj(a) for a in self.c])

    def re(self):
        return (self + self.conj()) * Fraction(1, 2)

    def im(self):
        return (self - self.conj()) * (1 / (2 * self.ctx.const(1j)))

    def max_abs(self):
        return max(abs(self.ctx.to_complex(a)) for a in self.c)


# -- elementary functions ------------------------------------------------------


def jexp(f: Jet) -> Jet:
    c = f.c
    h = [f.ctx.exp(c[0])]
    for k in range(1, len(c)):
        h.append(sum(j * c[j] * h[k - j] for j in range(1, k + 1)) / k)
    return f._new(h)


def jlog(f: Jet) -> Jet:
    f._check("log")
    c = f.c
    h = [f.ctx.log(c[0])]
    for k in range(1, len(c)):
        s = sum(j * h[j] * c[k - j] for j in range(1, k))
        h.append((c[k] - s / k) / c[0])
    return f._new(h)


def jsincos(f: Jet):
    c = f.c
    s = [f.ctx.sin(c[0])]
    co = [f.ctx.cos(c[0])]
    for k in range(1, len(c)):
        s.append(sum(j * c[j] * co[k - j] for j in range(1, k + 1)) / k)
        co.append(-sum(j * c[j] * s[k - j] for j in range(1, k + 1)) / k)
    return f._new(s), f._new(co)


def jsin(f):
    return jsincos(f)[0]


def jcos(f):
    return jsincos(f)[1]


def jtan(f):
    s, c = jsincos(f)
    return s / c


def jpow(f: Jet, alpha: Fraction) -> Jet:
    """f^alpha on the principal branch at x0."""
    alpha = Fraction(alpha)
    if alpha.denominator == 1:
        return f._int_power(int(alpha))
    f._check("fractional power")
    c = f.c
    a = f.ctx.const(alpha)
    h = [f.ctx.power(c[0], alpha)]
    for k in range(1, len(c)):
        s = sum((a * j - (k - j)) * c[j] * h[k - j] for j in range(1, k + 1))
        h.append(s / (k * c[0]))
    return f._new(h)


def jsqrt(f: Jet) -> Jet:
    return jpow(f, Fraction(1, 2))


JET_FUNCTIONS = {"sin": jsin, "cos": jcos, "tan": jtan, "exp": jexp, "log": jlog}


# -- functions given by Taylor data ------------------------------------------


class PolynomialFunction:
    """f(t) = sum a_k (t - t0)^k, usable as an opaque-function definition.

    Called as f(value, order) it returns the order-th derivative at value,
    which is the protocol of both ``expr.evaluate`` and ``jet_eval``.
    """

    def __init__(self, t0, coeffs):
        self.t0 = t0
        self.coeffs = list(coeffs)

    def __call__(self, value, order=0):
        h = value - self.t0
        total = 0
        for k in range(order, len(self.coeffs)):
            fall = math.perm(k, order)
            total += self.coeffs[k] * fall * h ** (k - order)
        return total


# -- evaluation of expressions -----------------------------------------------


def _compose(F_coeffs, g: Jet) -> Jet:
    """sum_j F_j (g - g0)^j, with F_j the Taylor coefficients of the outer function."""
    K = g.order
    dg = g - g.c[0]
    out = Jet.constant(0, K, g.x0, g.ctx, g.floor)
    for Fj in reversed(F_coeffs[: K + 1]):
        out = out * dg + Fj
    return out


def jet_eval(e, x0, order, params=None, functions=None, var="x", ctx=COMPLEX,
             floor=DEFAULT_FLOOR) -> Jet:
    """Taylor coefficients of e (as a function of var) at x0 up to ``order``.

    ``params`` binds the other symbols to numbers.  ``functions`` maps opaque
    function names to ``(param, body)`` definitions or to callables
    ``f(value, derivative_order)``.
    """
    e = as_expr(e)
    params = params or {}
    functions = functions or {}
    memo = {}
    for node in walk(e):
        k = node.kind
        if k == NUM:
            memo[node] = Jet.constant(node.value, order, x0, ctx, floor)
        elif k == IMAG:
            memo[node] = Jet.constant(1j, order, x0, ctx, floor)
        elif k == SYM:
            name = node.args[0]
            if name == var:
                memo[node] = Jet.variable(x0, order, ctx, floor)
            elif name in params:
                memo[node] = Jet.constant(params[name], order, x0, ctx, floor)
            else:
                raise UnboundSymbol(f"symbol {name!r} has no value")
        elif k == ADD:
            acc = memo[node.args[0]]
            for a in node.args[1:]:
                acc = acc + memo[a]
            memo[node] = acc
        elif k == MUL:
            acc = memo[node.args[0]]
            for a in node.args[1:]:
                acc = acc * memo[a]
            memo[node] = acc
        elif k == POW:
            b, x = node.args
            if x.kind == NUM:
                memo[node] = jpow(memo[b], x.value)
            else:
                memo[node] = jexp(memo[x] * jlog(memo[b]))
        elif k == FN:
            memo[node] = JET_FUNCTIONS[node.args[0]](memo[node.args[1]])
        elif k == UFN:
            memo[node] = _apply_function(node, memo[node.args[1]], params, functions, ctx, floor)
    return memo[e]


def _apply_function(node, g: Jet, params, functions, ctx, floor):
    name, _arg, dorder = node.args
    if name not in functions:
        raise UnboundSymbol(f"function {name!r} has no definition")
    f = functions[name]
    K = g.order
    t0 = g.c[0]
    if callable(f):
        coeffs = [ctx.const(f(ctx.to_complex(t0) if ctx is COMPLEX else t0, dorder + j))
                  / math.factorial(j) for j in range(K + 1)]
    else:
        param, body = f
        inner = dict(params)
        inner.pop(param, None)
        F = jet_eval(body, t0, K + dorder, inner, functions, param, ctx, floor).deriv(dorder)
        coeffs = F.c
    return _compose(coeffs, g)
