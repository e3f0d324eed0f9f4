"""Expression text -> Expr.

Grammar (Pratt parser, explicit ``*`` required)::

    expr    := sum
    sum     := product (('+' | '-') product)*
    product := unary (('*' | '/') unary)*
    unary   := '-' unary | '+' unary | power
    power   := atom ('^' unary)?          # right associative, tighter than unary minus
    atom    := number | name | name "'"* '(' expr ')' | 'D(' expr ',' name [',' int] ')'
             | '(' expr ')'

``i`` is the imaginary unit; ``sin cos tan sqrt exp log`` are known
functions; any other ``name(arg)`` is an opaque function and trailing
primes give its derivative order (``f''(x)``).  Decimal literals are read
as exact rationals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .errors import ExprSyntaxError
from .expr import I, Num, Sym, add, fn, mul, power, ufn

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:\.\d*)?(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_]*)"
    r"|(?P<op>\*\*|[-+*/^(),']))"
)

FUNCTIONS = ("sin", "cos", "tan", "sqrt", "exp", "log")


@dataclass
class _Tok:
    kind: str    # num, name, op, end
    text: str
    pos: int


def _tokenize(text: str):
    pos = 0
    out = []
    n = len(text)
    while True:
        while pos < n and text[pos].isspace():
            pos += 1
        if pos >= n:
            out.append(_Tok("end", "", pos))
            return out
        m = _TOKEN.match(text, pos)
        if m is None or m.end() == pos:
            raise ExprSyntaxError(f"unexpected character {text[pos]!r}", pos,
                                  ("number", "name", "operator"))
        kind = m.lastgroup
        tok = m.group(kind)
        start = m.start(kind)
        if tok == "**":
            tok = "^"
        out.append(_Tok(kind, tok, start))
        pos = m.end()


_BINARY = {"+": 10, "-": 10, "*": 20, "/": 20, "^": 30}
_UNARY_MINUS = 25


class _Parser:
    def __init__(self, text):
        self.text = text
        self.toks = _tokenize(text)
        self.k = 0

    @property
    def tok(self):
        return self.toks[self.k]

    def advance(self):
        t = self.toks[self.k]
        self.k += 1
        return t

    def expect(self, text):
        t = self.tok
        if t.text != text or t.kind not in ("op",):
            raise ExprSyntaxError(f"expected {text!r}, found {t.text or 'end of input'!r}",
                                  t.pos, (text,))
        return self.advance()

    def parse(self):
        e = self.expr(0)
        if self.tok.kind != "end":
            t = self.tok
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.pos,
                                  ("+", "-", "*", "/", "^", "end of input"))
        return e

    def expr(self, rbp):
        left = self.nud()
        while True:
            t = self.tok
            if t.kind == "op" and t.text in _BINARY:
                lbp = _BINARY[t.text]
                if lbp <= rbp:
                    break
                self.advance()
                if t.text == "^":
                    # right associative; the exponent may carry a unary sign
                    right = self.expr(lbp - 1)
                    left = power(left, right)
                else:
                    right = self.expr(lbp)
                    if t.text == "+":
                        left = add(left, right)
                    elif t.text == "-":
                        left = add(left, mul(-1, right))
                    elif t.text == "*":
                        left = mul(left, right)
                    else:
                        left = mul(left, power(right, -1))
                continue
            if t.kind in ("num", "name") or (t.kind == "op" and t.text == "("):
                raise ExprSyntaxError("implicit multiplication is not allowed; use '*'",
                                      t.pos, ("*",))
            break
        return left

    def nud(self):
        t = self.advance()
        if t.kind == "num":
            return Num(Fraction(t.text))
        if t.kind == "op":
            if t.text == "-":
                return mul(-1, self.expr(_UNARY_MINUS))
            if t.text == "+":
                return self.expr(_UNARY_MINUS)
            if t.text == "(":
                e = self.expr(0)
                self.expect(")")
                return e
            raise ExprSyntaxError(f"unexpected {t.text!r}", t.pos,
                                  ("number", "name", "(", "-"))
        if t.kind == "name":
            return self.name(t)
        raise ExprSyntaxError("unexpected end of input", t.pos, ("number", "name", "("))

    def name(self, t):
        order = 0
        while self.tok.kind == "op" and self.tok.text == "'":
            self.advance()
            order += 1
        is_call = self.tok.kind == "op" and self.tok.text == "("
        if not is_call:
            if order:
                raise ExprSyntaxError("derivative marks must be followed by '('",
                                      self.tok.pos, ("(",))
            if t.text == "i":
                return I
            return Sym(t.text)
        if t.text == "i":
            raise ExprSyntaxError("'i' is the imaginary unit, not a function", t.pos,
                                  ("*",))
        self.advance()
        if t.text == "D" and order == 0:
            return self.derivative_call(t)
        arg = self.expr(0)
        self.expect(")")
        if t.text in FUNCTIONS:
            if order:
                raise ExprSyntaxError(f"primes are only allowed on opaque functions, not {t.text}",
                                      t.pos, ())
            return fn(t.text, arg)
        return ufn(t.text, arg, order)

    def derivative_call(self, t):
        from .calculus.diff import differentiate

        body = self.expr(0)
        self.expect(",")
        v = self.advance()
        if v.kind != "name" or v.text == "i":
            raise ExprSyntaxError("expected a variable name", v.pos, ("name",))
        k = 1
        if self.tok.kind == "op" and self.tok.text == ",":
            self.advance()
            kt = self.advance()
            if kt.kind != "num" or not kt.text.isdigit():
                raise ExprSyntaxError("expected a derivative order", kt.pos, ("integer",))
            k = int(kt.text)
        self.expect(")")
        return differentiate(body, v.text, k)


def parse_expr(text: str):
    """Parse expression text into a canonical Expr."""
    if not isinstance(text, str):
        raise TypeError("expression text must be a string")
    return _Parser(text).parse()
