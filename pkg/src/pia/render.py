"""Plain, TeX and Fortran renderers.

Plain text is the parser's own syntax, so ``parse_expr(plain(e)) is e``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction

from .expr import ADD, FN, IMAG, MUL, NUM, POW, SYM, UFN, Expr, as_expr

FORMS = ("plain", "tex", "fortran")
FRACTION_STYLES = ("simple", "common", "none")

_FORM_CODES = {"o": "plain", "t": "tex", "f": "fortran"}
_FRACTION_CODES = {"s": "simple", "c": "common", "n": "none"}


@dataclass(frozen=True)
class RenderSpec:
    form: str = "plain"
    fraction_style: str = "none"
    variable: str = "x"

    def __post_init__(self):
        form = _FORM_CODES.get(self.form, self.form)
        style = _FRACTION_CODES.get(self.fraction_style, self.fraction_style)
        if form not in FORMS:
            raise ValueError(f"unknown output form {self.form!r}")
        if style not in FRACTION_STYLES:
            raise ValueError(f"unknown fraction style {self.fraction_style!r}")
        object.__setattr__(self, "form", form)
        object.__setattr__(self, "fraction_style", style)


# -- shared structure ------------------------------------------------------


def _split_product(e: Expr):
    """(rational coefficient, numerator factors, denominator factors)."""
    coeff = Fraction(1)
    num, den = [], []
    factors = e.args if e.kind == MUL else (e,)
    for f in factors:
        if f.kind == NUM:
            coeff *= f.value
        elif f.kind == POW and f.args[1].kind == NUM and f.args[1].value < 0:
            b, x = f.args
            inv = -x.value
            den.append(b if inv == 1 else _pow_node(b, inv))
        else:
            num.append(f)
    return coeff, num, den


def _pow_node(b, n):
    from .expr import Num, _make

    return _make(POW, (b, Num(n)))


def _is_negative(e: Expr) -> bool:
    if e.kind == NUM:
        return e.value < 0
    if e.kind == MUL and e.args[0].kind == NUM:
        return e.args[0].value < 0
    return False


def _negate(e: Expr) -> Expr:
    from .expr import mul

    return mul(-1, e)


# -- plain -------------------------------------------------------------------

_P_SUM, _P_PROD, _P_NEG, _P_POW, _P_ATOM = 1, 2, 3, 4, 5


def _plain(e: Expr):
    """Return (text, precedence)."""
    k = e.kind
    if k == NUM:
        v = e.value
        if v.denominator == 1:
            return str(v.numerator), (_P_ATOM if v >= 0 else _P_NEG)
        return f"{v.numerator}/{v.denominator}", (_P_PROD if v > 0 else _P_NEG)
    if k == IMAG:
        return "i", _P_ATOM
    if k == SYM:
        return e.args[0], _P_ATOM
    if k == FN:
        return f"{e.args[0]}({_plain(e.args[1])[0]})", _P_ATOM
    if k == UFN:
        name, arg, order = e.args
        return f"{name}{chr(39) * order}({_plain(arg)[0]})", _P_ATOM
    if k == ADD:
        parts = []
        for j, t in enumerate(e.args):
            if j and _is_negative(t):
                txt, p = _plain(_negate(t))
                if p <= _P_SUM:
                    txt = f"({txt})"
                parts.append(f" - {txt}")
            else:
                txt, p = _plain(t)
                if j and p <= _P_SUM:
                    txt = f"({txt})"
                parts.append(f" + {txt}" if j else txt)
        return "".join(parts), _P_SUM
    if k == POW:
        b, x = e.args
        if x.kind == NUM and x.value == Fraction(1, 2):
            return f"sqrt({_plain(b)[0]})", _P_ATOM
        if x.kind == NUM and x.value < 0:
            return _plain_product(e)
        return _plain_pow(b, x), _P_POW
    return _plain_product(e)


def _plain_pow(b, x):
    bt, bp = _plain(b)
    if bp <= _P_POW:
        bt = f"({bt})"
    if x.kind == NUM and x.value.denominator == 1 and x.value > 0:
        xt = str(x.value.numerator)
    else:
        xt, xp = _plain(x)
        if xp < _P_ATOM:
            xt = f"({xt})"
    return f"{bt}^{xt}"


def _plain_factor(f):
    if f.kind == POW and f.args[1].kind == NUM and f.args[1].value == Fraction(1, 2):
        return f"sqrt({_plain(f.args[0])[0]})"
    t, p = _plain(f)
    if p < _P_POW:
        t = f"({t})"
    return t


def _plain_product(e):
    coeff, num, den = _split_product(e)
    sign = "-" if coeff < 0 else ""
    coeff = abs(coeff)
    ntxt = [_plain_factor(f) for f in num]
    if coeff.numerator != 1 or not ntxt:
        ntxt.insert(0, str(coeff.numerator))
    text = "*".join(ntxt)
    dparts = [_plain_factor(f) for f in den]
    if coeff.denominator != 1:
        dparts.insert(0, str(coeff.denominator))
    if dparts:
        dtxt = dparts[0] if len(dparts) == 1 else "(" + "*".join(dparts) + ")"
        text = f"{text}/{dtxt}"
    if sign:
        return f"-{text}", _P_NEG
    return text, _P_PROD


def plain(e) -> str:
    return _plain(as_expr(e))[0]


# -- TeX ---------------------------------------------------------------------

_GREEK = {
    "alpha", "beta", "gamma", "delta", "epsilon", "zeta", "eta", "theta", "iota",
    "kappa", "lambda", "mu", "nu", "xi", "pi", "rho", "sigma", "tau", "upsilon",
    "phi", "chi", "psi", "omega", "Gamma", "Delta", "Theta", "Lambda", "Xi", "Pi",
    "Sigma", "Phi", "Psi", "Omega",
}
_TEX_ALIASES = {"eps": "varepsilon", "om": "omega", "fi": "varphi"}


def _tex_name(name: str) -> str:
    m = re.fullmatch(r"([A-Za-z]+)_?(\d*)", name)
    if m is None:
        return r"\mathrm{" + name.replace("_", r"\_") + "}"
    stem, digits = m.groups()
    stem = _TEX_ALIASES.get(stem, stem)
    if stem in _GREEK or stem == "varepsilon" or stem == "varphi":
        stem = "\\" + stem
    elif len(stem) > 1:
        stem = r"\mathrm{" + stem + "}"
    return f"{stem}_{{{digits}}}" if digits else stem


def _tex(e: Expr):
    k = e.kind
    if k == NUM:
        v = e.value
        if v.denominator == 1:
            return str(v.numerator), (_P_ATOM if v >= 0 else _P_NEG)
        s = "-" if v < 0 else ""
        return f"{s}\\frac{{{abs(v.numerator)}}}{{{v.denominator}}}", (_P_PROD if v > 0 else _P_NEG)
    if k == IMAG:
        return "i", _P_ATOM
    if k == SYM:
        return _tex_name(e.args[0]), _P_ATOM
    if k == FN:
        return f"\\{e.args[0]}\\left({_tex(e.args[1])[0]}\\right)", _P_ATOM
    if k == UFN:
        name, arg, order = e.args
        primes = "'" * order if order <= 3 else f"^{{({order})}}"
        return f"{_tex_name(name)}{primes}\\left({_tex(arg)[0]}\\right)", _P_ATOM
    if k == ADD:
        parts = []
        for j, t in enumerate(e.args):
            if j and _is_negative(t):
                txt, p = _tex(_negate(t))
                if p <= _P_SUM:
                    txt = f"\\left({txt}\\right)"
                parts.append(f" - {txt}")
            else:
                txt, p = _tex(t)
                if j and p <= _P_SUM:
                    txt = f"\\left({txt}\\right)"
                parts.append(f" + {txt}" if j else txt)
        return "".join(parts), _P_SUM
    if k == POW:
        b, x = e.args
        if x.kind == NUM and x.value == Fraction(1, 2):
            return f"\\sqrt{{{_tex(b)[0]}}}", _P_ATOM
        if x.kind == NUM and x.value < 0:
            return _tex_product(e)
        bt, bp = _tex(b)
        if bp <= _P_POW or b.kind in (FN, UFN):
            bt = f"\\left({bt}\\right)"
        if x.kind == NUM:
            v = x.value
            xt = str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"
        else:
            xt = _tex(x)[0]
        return f"{bt}^{{{xt}}}", _P_POW
    return _tex_product(e)


def _tex_factor(f):
    t, p = _tex(f)
    if p <= _P_SUM or p == _P_NEG:
        t = f"\\left({t}\\right)"
    return t


def _tex_product(e):
    coeff, num, den = _split_product(e)
    sign = "-" if coeff < 0 else ""
    coeff = abs(coeff)
    if den and len(num) == 1 and coeff.numerator == 1:
        # a lone numerator factor needs no parentheses inside \frac
        ntxt = [_tex(num[0])[0]]
    else:
        ntxt = [_tex_factor(f) for f in num]
    if coeff.numerator != 1 or not ntxt:
        ntxt.insert(0, str(coeff.numerator))
    dtxt = [_tex_factor(f) for f in den]
    if len(den) == 1 and coeff.denominator == 1:
        dtxt = [_tex(den[0])[0]]
    if coeff.denominator != 1:
        dtxt.insert(0, str(coeff.denominator))
    top = " ".join(ntxt)
    if dtxt:
        text = f"\\frac{{{top}}}{{{' '.join(dtxt)}}}"
    else:
        text = top
    if sign:
        return f"-{text}", _P_NEG
    return text, _P_PROD


def tex(e) -> str:
    return _tex(as_expr(e))[0]


# -- Fortran -----------------------------------------------------------------


def _f_name(name: str) -> str:
    return name


def _f_num(v: Fraction) -> str:
    if v.denominator == 1:
        return f"{abs(v.numerator)}.d0"
    return f"({abs(v.numerator)}.d0/{v.denominator}.d0)"


def _fortran(e: Expr):
    k = e.kind
    if k == NUM:
        v = e.value
        txt = _f_num(v)
        return ("-" + txt if v < 0 else txt), (_P_ATOM if v >= 0 else _P_NEG)
    if k == IMAG:
        return "(0.d0,1.d0)", _P_ATOM
    if k == SYM:
        return _f_name(e.args[0]), _P_ATOM
    if k == FN:
        return f"{e.args[0]}({_fortran(e.args[1])[0]})", _P_ATOM
    if k == UFN:
        name, arg, order = e.args
        fname = f"{name}_d{order}" if order else name
        return f"{fname}({_fortran(arg)[0]})", _P_ATOM
    if k == ADD:
        parts = []
        for j, t in enumerate(e.args):
            if j and _is_negative(t):
                txt, p = _fortran(_negate(t))
                if p <= _P_SUM:
                    txt = f"({txt})"
                parts.append(f" - {txt}")
            else:
                txt, p = _fortran(t)
                if j and p <= _P_SUM:
                    txt = f"({txt})"
                parts.append(f" + {txt}" if j else txt)
        return "".join(parts), _P_SUM
    if k == POW:
        b, x = e.args
        if x.kind == NUM and x.value == Fraction(1, 2):
            return f"sqrt({_fortran(b)[0]})", _P_ATOM
        if x.kind == NUM and x.value < 0:
            return _fortran_product(e)
        bt, bp = _fortran(b)
        if bp <= _P_POW:
            bt = f"({bt})"
        if x.kind == NUM and x.value.denominator == 1:
            xt = str(x.value.numerator)
        elif x.kind == NUM:
            xt = _f_num(x.value)
            if not xt.startswith("("):
                xt = f"({xt})"
        else:
            xt = f"({_fortran(x)[0]})"
        return f"{bt}**{xt}", _P_POW
    return _fortran_product(e)


def _fortran_factor(f):
    t, p = _fortran(f)
    if p < _P_POW:
        t = f"({t})"
    return t


def _fortran_product(e):
    coeff, num, den = _split_product(e)
    sign = "-" if coeff < 0 else ""
    coeff = abs(coeff)
    ntxt = [_fortran_factor(f) for f in num]
    if coeff.numerator != 1 or not ntxt:
        ntxt.insert(0, f"{coeff.numerator}.d0")
    dtxt = [_fortran_factor(f) for f in den]
    if coeff.denominator != 1:
        dtxt.insert(0, f"{coeff.denominator}.d0")
    text = "*".join(ntxt)
    if dtxt:
        d = dtxt[0] if len(dtxt) == 1 else "(" + "*".join(dtxt) + ")"
        text = f"{text}/{d}"
    if sign:
        return f"-{text}", _P_NEG
    return text, _P_PROD


def fortran(e) -> str:
    return _fortran(as_expr(e))[0]


def fortran_statement(name: str, e, width: int = 72) -> str:
    """``name = expr`` wrapped with free-form '&' continuation lines."""
    text = f"{name} = {fortran(e)}"
    if len(text) <= width:
        return text
    lines = []
    while len(text) > width:
        cut = width - 2
        # prefer breaking before an operator surrounded by spaces
        brk = text.rfind(" ", 0, cut)
        if brk <= 10:
            brk = cut
        lines.append(text[:brk] + " &")
        text = "     & " + text[brk:].lstrip()
    lines.append(text)
    return "\n".join(lines)


# -- dispatch ----------------------------------------------------------------


def apply_fraction_style(e, spec: RenderSpec):
    from .calculus import apart, together
    from .errors import FactorizationOutOfScope

    e = as_expr(e)
    if spec.fraction_style == "common":
        return together(e)
    if spec.fraction_style == "simple":
        try:
            return apart(e, spec.variable)
        except FactorizationOutOfScope as exc:
            return exc.together if exc.together is not None else together(e)
    return e


def render(e, spec: RenderSpec = None) -> str:
    spec = spec or RenderSpec()
    e = apply_fraction_style(e, spec)
    if spec.form == "tex":
        return tex(e)
    if spec.form == "fortran":
        return fortran(e)
    return plain(e)
