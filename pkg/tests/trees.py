"""Random canonical expression trees for property tests."""

import random
from fractions import Fraction

from hypothesis import strategies as st

from pia.expr import I, Num, Sym, add, cos, exp, log, mul, power, sin, sqrt, tan, ufn

SYMBOLS = ("x", "y", "a")
UNARY = (sin, cos, tan, exp, log, sqrt)
EXPONENTS = (2, 3, -1, -2, Fraction(1, 2), Fraction(-1, 2), Fraction(3, 2))


def _leaf(rng):
    r = rng.random()
    if r < 0.45:
        return Sym(rng.choice(SYMBOLS))
    if r < 0.8:
        return Num(Fraction(rng.randint(-9, 9), rng.choice((1, 1, 2, 3))))
    if r < 0.9:
        return I
    return ufn("f", Sym("x"), rng.randint(0, 2))


def random_tree(rng, depth=6):
    """A canonical Expr of depth at most ``depth``."""
    if depth <= 1 or rng.random() < 0.25:
        return _leaf(rng)
    op = rng.randrange(5)
    sub = lambda: random_tree(rng, depth - 1)
    if op == 0:
        return add(*(sub() for _ in range(rng.randint(2, 3))))
    if op == 1:
        return mul(*(sub() for _ in range(rng.randint(2, 3))))
    if op == 2:
        base = sub()
        if base.is_zero():
            base = Sym("x")
        return power(base, Num(rng.choice(EXPONENTS)))
    if op == 3:
        return rng.choice(UNARY)(sub())
    return power(sub(), Sym(rng.choice(SYMBOLS)))


def random_trees(n, seed=0, depth=6):
    rng = random.Random(seed)
    return [random_tree(rng, depth) for _ in range(n)]


@st.composite
def trees(draw, depth=6):
    seed = draw(st.integers(min_value=0, max_value=2**32 - 1))
    return random_tree(random.Random(seed), depth)
