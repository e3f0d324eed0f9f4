"""Immutable, hash-consed symbolic expressions.

Every constructor canonicalizes: sums and products are flattened, numeric
constants merged, operands sorted, and powers of the imaginary unit reduced.
Structurally equal expressions are the same object, so ``==`` is identity.
"""

from __future__ import annotations

import cmath
import contextlib
import contextvars
import threading
import weakref
from fractions import Fraction
from numbers import Rational

from sympy import factorint

from .errors import NotLinearInI, UnboundSymbol

NUM, IMAG, SYM, UFN, FN, POW, MUL, ADD = range(8)

KNOWN_FUNCTIONS = ("sin", "cos", "tan", "exp", "log")

_table = weakref.WeakValueDictionary()
_lock = threading.Lock()


class Expr:
    __slots__ = ("kind", "args", "key", "free", "has_i", "_dcache", "__weakref__")

    # -- arithmetic sugar ------------------------------------------------
    def __add__(self, other):
        return add(self, other)

    def __radd__(self, other):
        return add(other, self)

    def __sub__(self, other):
        return add(self, mul(-1, other))

    def __rsub__(self, other):
        return add(other, mul(-1, self))

    def __mul__(self, other):
        return mul(self, other)

    def __rmul__(self, other):
        return mul(other, self)

    def __truediv__(self, other):
        return mul(self, power(other, -1))

    def __rtruediv__(self, other):
        return mul(other, power(self, -1))

    def __pow__(self, other):
        return power(self, other)

    def __rpow__(self, other):
        return power(other, self)

    def __neg__(self):
        return mul(-1, self)

    def __pos__(self):
        return self

    def __repr__(self):
        from .render import plain

        return f"Expr({plain(self)})"

    def __str__(self):
        from .render import plain

        return plain(self)

    def __reduce__(self):
        return (_rebuild, (self.kind, self.args))

    # -- accessors -------------------------------------------------------
    @property
    def value(self):
        return self.args[0]

    @property
    def name(self):
        return self.args[0]

    @property
    def is_number(self):
        return self.kind == NUM

    def is_zero(self):
        return self is ZERO

    def depends_on(self, var):
        return var in self.free


def _rebuild(kind, args):
    if kind == NUM:
        return Num(args[0])
    if kind == IMAG:
        return I
    if kind == SYM:
        return Sym(args[0])
    if kind == FN:
        return fn(args[0], args[1])
    if kind == UFN:
        return ufn(*args)
    if kind == POW:
        return power(*args)
    if kind == MUL:
        return mul(*args)
    return add(*args)


def _make(kind, args):
    tkey = (kind, args)
    node = _table.get(tkey)
    if node is not None:
        return node
    node = Expr.__new__(Expr)
    node.kind = kind
    node.args = args
    node._dcache = None
    if kind == NUM:
        node.key = (0, args[0])
        node.free = frozenset()
        node.has_i = False
    elif kind == IMAG:
        node.key = (1,)
        node.free = frozenset()
        node.has_i = True
    elif kind == SYM:
        node.key = (2, args[0])
        node.free = frozenset((args[0],))
        node.has_i = False
    elif kind == UFN:
        node.key = (3, args[0], args[2], args[1].key)
        node.free = args[1].free
        node.has_i = args[1].has_i
    elif kind == FN:
        node.key = (4, args[0], args[1].key)
        node.free = args[1].free
        node.has_i = args[1].has_i
    elif kind == POW:
        node.key = (5, args[0].key, args[1].key)
        node.free = args[0].free | args[1].free
        node.has_i = args[0].has_i or args[1].has_i
    else:
        node.key = (kind, tuple(a.key for a in args))
        node.free = frozenset().union(*(a.free for a in args))
        node.has_i = any(a.has_i for a in args)
    with _lock:
        existing = _table.get(tkey)
        if existing is not None:
            return existing
        _table[tkey] = node
    return node


def Num(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if not isinstance(v, Fraction):
        if isinstance(v, bool) or not isinstance(v, Rational):
            raise TypeError(f"exact rational expected, got {v!r}")
        v = Fraction(v)
    return _make(NUM, (v,))


def Sym(name: str) -> Expr:
    if name == "i":
        raise ValueError("'i' is the imaginary unit, not a symbol")
    return _make(SYM, (name,))


def as_expr(v) -> Expr:
    if isinstance(v, Expr):
        return v
    if isinstance(v, str):
        from .parse import parse_expr

        return parse_expr(v)
    return Num(v)


ZERO = Num(0)
ONE = Num(1)
NEG_ONE = Num(-1)
HALF = Num(Fraction(1, 2))
TWO = Num(2)
I = _make(IMAG, ())
NEG_I = _make(MUL, (NEG_ONE, I))


# -- assumptions -----------------------------------------------------------


class AssumptionRegistry:
    """Per-symbol realness/positivity flags.

    All symbols are real unless flagged otherwise; positivity is opt-in and
    gates the ``sqrt(u^2) -> u`` rewrite.
    """

    def __init__(self, positive=(), nonreal=()):
        self._positive = frozenset(positive)
        self._nonreal = frozenset(nonreal)
        if "i" in self._positive or "i" in self._nonreal:
            raise ValueError("the imaginary unit cannot carry assumptions")

    def is_real(self, name):
        return name not in self._nonreal

    def is_positive(self, name):
        return name in self._positive

    @property
    def positive(self):
        return self._positive

    def with_positive(self, *names):
        return AssumptionRegistry(self._positive | set(names), self._nonreal)


_assumptions = contextvars.ContextVar("pia_assumptions", default=AssumptionRegistry())


def current_assumptions() -> AssumptionRegistry:
    return _assumptions.get()


@contextlib.contextmanager
def assuming(registry=None, positive=()):
    reg = registry if registry is not None else current_assumptions()
    if positive:
        reg = reg.with_positive(*positive)
    token = _assumptions.set(reg)
    try:
        yield reg
    finally:
        _assumptions.reset(token)


# -- construction ----------------------------------------------------------


def _i_power(n: int) -> Expr:
    return (ONE, I, NEG_ONE, NEG_I)[n % 4]


_FACTOR_LIMIT = 10**24


def _int_root_power(a: int, r: Fraction):
    """a**r for integer a > 1 and rational r, as (coefficient, [(prime, frac)])."""
    if a > _FACTOR_LIMIT:
        whole = r.numerator // r.denominator
        frac = r - whole
        return Fraction(a) ** whole, ([(a, frac)] if frac else [])
    coeff = Fraction(1)
    rest = []
    for p, k in sorted(factorint(a).items()):
        e = k * r
        whole = e.numerator // e.denominator
        frac = e - whole
        coeff *= Fraction(p) ** whole
        if frac:
            rest.append((p, frac))
    return coeff, rest


def _num_power(q: Fraction, n: Fraction) -> Expr:
    if n.denominator == 1:
        if q == 0 and n < 0:
            raise ZeroDivisionError("0 raised to a negative power")
        return Num(q ** int(n))
    if q == 0:
        if n > 0:
            return ZERO
        raise ZeroDivisionError("0 raised to a negative power")
    if q == 1:
        return ONE
    if q < 0:
        if n.denominator == 2:
            return mul(_i_power(n.numerator), _num_power(-q, n))
        k = (n.numerator // (2 * n.denominator)) * 2
        red = n - k
        if red > 1:
            red -= 2
        return mul(_make(POW, (NEG_ONE, Num(red))), _num_power(-q, n))
    c1, r1 = _int_root_power(q.numerator, n)
    c2, r2 = _int_root_power(q.denominator, -n)
    parts = [(p, f) for p, f in r1 + r2]
    if not parts:
        return Num(c1 * c2)
    coeff = c1 * c2
    facs = []
    for p, f in parts:
        whole = f.numerator // f.denominator
        frac = f - whole
        coeff *= Fraction(p) ** whole
        facs.append(_make(POW, (Num(p), Num(frac))))
    if len(facs) == 1 and coeff == 1:
        return facs[0]
    facs.sort(key=_factor_key)
    if coeff == 1:
        return _make(MUL, tuple(facs))
    return _make(MUL, (Num(coeff),) + tuple(facs))


def _base_exp(f: Expr):
    if f.kind == POW:
        return f.args[0], f.args[1]
    return f, ONE


def _factor_key(f: Expr):
    b, e = _base_exp(f)
    return (b.key, e.key)


def _positive_expr(u: Expr) -> bool:
    """All symbols of u registered positive (the blunt sqrt(u^2) rule)."""
    if u.has_i:
        return False
    if u.kind == NUM:
        return u.value > 0
    if not u.free:
        return False
    reg = current_assumptions()
    return all(reg.is_positive(s) for s in u.free)


def _sqrt_rule(b: Expr, n: Fraction):
    """(u^(2k))^(p/2) -> u^(k p) when u is declared positive; else None."""
    if b.kind == POW and b.args[1].kind == NUM:
        e = b.args[1].value
        if e.denominator == 1 and e.numerator % 2 == 0 and _positive_expr(b.args[0]):
            return power(b.args[0], e * n)
        return None
    if b.kind == MUL:
        out = []
        for f in b.args:
            if f.kind == NUM:
                if f.value < 0:
                    return None
                out.append(_num_power(f.value, n))
                continue
            r = _sqrt_rule(f, n)
            if r is None:
                if _positive_expr(f):
                    out.append(power(f, Num(n)))
                    continue
                return None
            out.append(r)
        return mul(*out)
    return None


def power(b, e) -> Expr:
    b = as_expr(b)
    e = as_expr(e)
    if e.kind == NUM:
        n = e.value
        if n == 0:
            return ONE
        if n == 1:
            return b
        k = b.kind
        if k == NUM:
            return _num_power(b.value, n)
        if k == IMAG:
            if n.denominator == 1:
                return _i_power(int(n))
            return _make(POW, (b, e))
        if k == POW and n.denominator == 1:
            return power(b.args[0], mul(b.args[1], e))
        if k == MUL:
            if n.denominator == 1:
                return mul(*(power(f, e) for f in b.args))
            c = b.args[0]
            if c.kind == NUM and c.value > 0:
                rest = b.args[1:]
                inner = rest[0] if len(rest) == 1 else _make(MUL, rest)
                return mul(_num_power(c.value, n), power(inner, e))
        if n.denominator == 2:
            r = _sqrt_rule(b, n)
            if r is not None:
                return r
        return _make(POW, (b, e))
    if b is ONE:
        return ONE
    return _make(POW, (b, e))


def mul(*xs) -> Expr:
    coeff = Fraction(1)
    ipow = 0
    powers = {}
    stack = [as_expr(x) for x in xs]
    stack.reverse()
    while stack:
        x = stack.pop()
        k = x.kind
        if k == NUM:
            coeff *= x.value
        elif k == IMAG:
            ipow += 1
        elif k == MUL:
            stack.extend(reversed(x.args))
        elif k == POW:
            powers.setdefault(x.args[0], []).append(x.args[1])
        else:
            powers.setdefault(x, []).append(ONE)
    if coeff == 0:
        return ZERO
    factors = []
    dup = False
    seen = set()
    for base, exps in powers.items():
        if len(exps) == 1:
            p = base if exps[0] is ONE else _make(POW, (base, exps[0]))
        else:
            p = power(base, add(*exps))
        parts = p.args if p.kind == MUL else (p,)
        for f in parts:
            fk = f.kind
            if fk == NUM:
                coeff *= f.value
            elif fk == IMAG:
                ipow += 1
            else:
                if f is ONE:
                    continue
                fb = _base_exp(f)[0]
                if fb in seen:
                    dup = True
                seen.add(fb)
                factors.append(f)
    if coeff == 0:
        return ZERO
    ipow %= 4
    if ipow >= 2:
        coeff = -coeff
    if ipow % 2:
        factors.append(I)
    if dup:
        return mul(Num(coeff), *factors)
    if not factors:
        return Num(coeff)
    factors.sort(key=_factor_key)
    if coeff == 1:
        if len(factors) == 1:
            return factors[0]
        return _make(MUL, tuple(factors))
    return _make(MUL, (Num(coeff),) + tuple(factors))


def split_coeff(t: Expr):
    """Split a term into (rational coefficient, coefficient-free rest)."""
    if t.kind == NUM:
        return t.value, ONE
    if t.kind == MUL and t.args[0].kind == NUM:
        rest = t.args[1:]
        return t.args[0].value, (rest[0] if len(rest) == 1 else _make(MUL, rest))
    return Fraction(1), t


def _scaled(c: Fraction, rest: Expr) -> Expr:
    if c == 1:
        return rest
    if rest is ONE:
        return Num(c)
    if rest.kind == MUL:
        return _make(MUL, (Num(c),) + rest.args)
    return _make(MUL, (Num(c), rest))


def add(*xs) -> Expr:
    terms = {}
    stack = [as_expr(x) for x in xs]
    stack.reverse()
    while stack:
        x = stack.pop()
        if x.kind == ADD:
            stack.extend(reversed(x.args))
            continue
        c, rest = split_coeff(x)
        if c == 0:
            continue
        terms[rest] = terms.get(rest, 0) + c
    out = [(rest, c) for rest, c in terms.items() if c != 0]
    if not out:
        return ZERO
    if len(out) == 1:
        return _scaled(out[0][1], out[0][0])
    out.sort(key=lambda rc: (rc[0].key, rc[1]))
    return _make(ADD, tuple(_scaled(c, rest) for rest, c in out))


def _negative_leading(a: Expr) -> bool:
    if a.kind == NUM:
        return a.value < 0
    if a.kind == MUL:
        return a.args[0].kind == NUM and a.args[0].value < 0
    if a.kind == ADD:
        return _negative_leading(a.args[0])
    return False


def fn(name: str, arg) -> Expr:
    arg = as_expr(arg)
    if name == "sqrt":
        return power(arg, HALF)
    if name not in KNOWN_FUNCTIONS:
        raise ValueError(f"unknown function {name!r}")
    if name in ("sin", "cos", "tan"):
        if arg is ZERO:
            return ONE if name == "cos" else ZERO
        if _negative_leading(arg) and not arg.has_i:
            # mul does not distribute, so negate sums term by term
            neg = add(*(mul(-1, t) for t in arg.args)) if arg.kind == ADD else mul(-1, arg)
            inner = fn(name, neg)
            return inner if name == "cos" else mul(-1, inner)
    elif name == "exp":
        if arg is ZERO:
            return ONE
        if arg.kind == FN and arg.args[0] == "log":
            return arg.args[1]
    elif name == "log":
        if arg is ONE:
            return ZERO
    return _make(FN, (name, arg))


def ufn(name: str, arg, order: int = 0) -> Expr:
    """Opaque (user) function application, optionally differentiated."""
    if order < 0:
        raise ValueError("derivative order must be >= 0")
    return _make(UFN, (name, as_expr(arg), int(order)))


def sin(a):
    return fn("sin", a)


def cos(a):
    return fn("cos", a)


def tan(a):
    return fn("tan", a)


def exp(a):
    return fn("exp", a)


def log(a):
    return fn("log", a)


def sqrt(a):
    return power(a, HALF)


# -- traversal helpers -----------------------------------------------------


def rebuild(e: Expr, children) -> Expr:
    """Reconstruct a node of e's kind from new children (canonicalizing)."""
    k = e.kind
    if k == ADD:
        return add(*children)
    if k == MUL:
        return mul(*children)
    if k == POW:
        return power(children[0], children[1])
    if k == FN:
        return fn(e.args[0], children[0])
    if k == UFN:
        return ufn(e.args[0], children[0], e.args[2])
    return e


def children(e: Expr):
    k = e.kind
    if k in (ADD, MUL):
        return e.args
    if k == POW:
        return e.args
    if k in (FN, UFN):
        return (e.args[1],)
    return ()


def walk(e: Expr):
    """Post-order traversal over distinct nodes."""
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
        for c in children(node):
            if c not in seen:
                stack.append((c, False))
    return out


def map_bottom_up(e: Expr, f, memo=None) -> Expr:
    """Apply f to every node after its children were rebuilt."""
    memo = {} if memo is None else memo
    for node in walk(e):
        if node in memo:
            continue
        ch = children(node)
        if ch:
            new = [memo[c] for c in ch]
            node2 = node if all(a is b for a, b in zip(new, ch)) else rebuild(node, new)
        else:
            node2 = node
        memo[node] = f(node2)
    return memo[e]


def functions_in(e: Expr):
    return {n.args[0] for n in walk(e) if n.kind == UFN}


def normalize_i(e) -> Expr:
    """The form re(e) + i*im(e); raises NotLinearInI outside that class."""
    e = as_expr(e)
    if not e.has_i:
        return e
    r, i_ = split_i(e)
    return add(r, mul(I, i_))


# -- substitution ----------------------------------------------------------


def substitute(e, bindings=None, functions=None) -> Expr:
    """Simultaneous substitution of symbols and opaque-function definitions.

    ``functions`` maps a name to ``(param, body)``; an occurrence
    ``f^(k)(arg)`` becomes the k-th derivative of ``body`` in ``param`` with
    ``param`` replaced by the (substituted) argument.
    """
    from .calculus.diff import differentiate

    e = as_expr(e)
    bindings = {k: as_expr(v) for k, v in (bindings or {}).items()}
    functions = functions or {}

    def visit(node):
        if node.kind == SYM:
            return bindings.get(node.args[0], node)
        if node.kind == UFN and node.args[0] in functions:
            param, body = functions[node.args[0]]
            d = differentiate(as_expr(body), param, node.args[2])
            inner = dict(bindings)
            inner[param] = node.args[1]
            return substitute(d, inner, functions)
        return node

    return map_bottom_up(e, visit)


# -- real / imaginary split ------------------------------------------------


def _cmul(a, b):
    (ar, ai), (br, bi) = a, b
    if ai is ZERO and bi is ZERO:
        return mul(ar, br), ZERO
    return add(mul(ar, br), mul(-1, ai, bi)), add(mul(ar, bi), mul(ai, br))


def _cpow_int(z, n):
    if n < 0:
        zr, zi = z
        m2 = add(mul(zr, zr), mul(zi, zi))
        inv = mul(zr, power(m2, -1)), mul(-1, zi, power(m2, -1))
        return _cpow_int(inv, -n)
    result = (ONE, ZERO)
    base = z
    while n:
        if n & 1:
            result = _cmul(result, base)
        n >>= 1
        if n:
            base = _cmul(base, base)
    return result


def split_i(e) -> tuple:
    """Return (re, im) with e == re + i*im and both parts i-free.

    Every symbol, opaque function and function of an i-free argument is
    treated as real.
    """
    e = as_expr(e)
    memo = {}
    for node in walk(e):
        if not node.has_i:
            memo[node] = (node, ZERO)
            continue
        k = node.kind
        if k == IMAG:
            memo[node] = (ZERO, ONE)
        elif k == ADD:
            parts = [memo[a] for a in node.args]
            memo[node] = (add(*(p[0] for p in parts)), add(*(p[1] for p in parts)))
        elif k == MUL:
            acc = (ONE, ZERO)
            for a in node.args:
                acc = _cmul(acc, memo[a])
            memo[node] = acc
        elif k == POW:
            b, x = node.args
            if x.kind == NUM and x.value.denominator == 1 and not x.has_i:
                memo[node] = _cpow_int(memo[b], int(x.value))
            else:
                raise NotLinearInI(f"cannot split {node} into real and imaginary parts")
        else:
            raise NotLinearInI(f"cannot split {node} into real and imaginary parts")
    return memo[e]


def re(e) -> Expr:
    return split_i(e)[0]


def im(e) -> Expr:
    return split_i(e)[1]


def cc(e) -> Expr:
    """Complex conjugate under the all-symbols-real convention."""
    e = as_expr(e)
    if not e.has_i:
        return e
    r, i_ = split_i(e)
    return add(r, mul(-1, I, i_))


# -- numeric evaluation ----------------------------------------------------


def _clean(z: complex) -> complex:
    # -0.0 imaginary parts would put sqrt/log on the wrong side of the cut
    if z.imag == 0:
        return complex(z.real, 0.0)
    return z


def csqrt(z: complex) -> complex:
    return cmath.sqrt(_clean(z))


def cpow(b: complex, n: Fraction) -> complex:
    if n.denominator == 1:
        return b ** int(n)
    if n.denominator == 2:
        return csqrt(b) ** n.numerator
    b = _clean(b)
    if b == 0:
        return 0j if n > 0 else complex("inf")
    return cmath.exp(float(n) * cmath.log(b))


_CFUNCS = {
    "sin": cmath.sin,
    "cos": cmath.cos,
    "tan": cmath.tan,
    "exp": cmath.exp,
    "log": lambda z: cmath.log(_clean(z)),
}


def evaluate(e, env=None, functions=None) -> complex:
    """Evaluate at complex double precision.

    ``env`` maps symbol names to numbers; ``functions`` maps opaque function
    names to ``(param, body)`` definitions or to callables ``f(value, order)``.
    """
    from .calculus.diff import differentiate

    e = as_expr(e)
    env = env or {}
    functions = functions or {}
    memo = {}
    for node in walk(e):
        k = node.kind
        if k == NUM:
            v = node.value
            memo[node] = complex(float(v))
        elif k == IMAG:
            memo[node] = 1j
        elif k == SYM:
            try:
                memo[node] = complex(env[node.args[0]])
            except KeyError:
                raise UnboundSymbol(f"symbol {node.args[0]!r} has no value") from None
        elif k == ADD:
            memo[node] = sum(memo[a] for a in node.args)
        elif k == MUL:
            acc = 1 + 0j
            for a in node.args:
                acc *= memo[a]
            memo[node] = acc
        elif k == POW:
            b, x = node.args
            if x.kind == NUM:
                memo[node] = cpow(memo[b], x.value)
            else:
                bv = _clean(memo[b])
                memo[node] = cmath.exp(memo[x] * cmath.log(bv))
        elif k == FN:
            memo[node] = _CFUNCS[node.args[0]](memo[node.args[1]])
        elif k == UFN:
            name, arg, order = node.args
            if name not in functions:
                raise UnboundSymbol(f"function {name!r} has no definition")
            f = functions[name]
            if callable(f):
                memo[node] = complex(f(memo[arg], order))
            else:
                param, body = f
                d = differentiate(as_expr(body), param, order)
                inner = dict(env)
                inner[param] = memo[arg]
                memo[node] = evaluate(d, inner, functions)
    return memo[e]
