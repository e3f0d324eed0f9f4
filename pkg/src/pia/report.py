"""Result files and the appended numeric evaluation.

Every run writes ``<job>.res`` (plain), ``<job>.resTeX`` or ``<job>.resFor``
depending on the output form.  Timing lines start with `` CPU time`` so that
they can be masked when comparing runs.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import mpmath

from .calculus import simplify, together
from .errors import ScriptError, UnboundSymbol
from .expr import NUM, SYM, as_expr, substitute, walk
from .jet import MpContext, jet_eval
from .render import RenderSpec, _tex_name, fortran_statement, render

SUFFIX = {"plain": ".res", "tex": ".resTeX", "fortran": ".resFor"}
CPU_PREFIX = " CPU time"


@dataclass
class RunReport:
    job: str
    timings: dict = field(default_factory=dict)
    paths: list = field(default_factory=list)
    verification: str = None


class _Writer:
    def __init__(self, spec: RenderSpec):
        self.spec = spec
        self.lines = []

    def text(self, line=""):
        self.lines.append(line)

    def quantity(self, name, e, fractions=True):
        if e is None:
            return
        spec = self.spec if fractions else RenderSpec(self.spec.form, "none", self.spec.variable)
        if spec.form == "fortran":
            from .render import apply_fraction_style
            self.lines.append(fortran_statement(_fortran_name(name), apply_fraction_style(e, spec)))
        elif spec.form == "tex":
            self.lines.append(f"{_tex_label(name)} = {render(e, spec)}")
        else:
            self.lines.append(f"{name} = {render(e, spec)}")

    def vector(self, name, v, fractions=True):
        for k, comp in enumerate(v, 1):
            self.quantity(f"{name}{k}", comp, fractions)

    def comment(self, line):
        prefix = {"fortran": "! ", "tex": "% "}.get(self.spec.form, "")
        self.lines.append(prefix + line)

    def cpu(self, label, seconds):
        self.lines.append(f"{CPU_PREFIX} used for {label} (seconds): {seconds:.3f}")

    def dump(self):
        return "\n".join(self.lines) + "\n"


def _fortran_name(name):
    return "".join(ch if ch.isalnum() else "_" for ch in name).strip("_") or "q"


def _tex_label(name):
    return _tex_name(name)


def mask_timings(text):
    """Result text with the CPU time lines removed."""
    return "\n".join(l for l in text.splitlines() if not l.startswith(CPU_PREFIX))


# -- scalar --------------------------------------------------------------------------


def scalar_report(job, series, spec: RenderSpec) -> str:
    p = series.problem
    w = _Writer(spec)
    w.comment(f"job {job.name}: corrections Y_2n for u'' + R u = 0")
    if p.input_mode == "explicit":
        w.quantity("R", p.R, fractions=False)
    else:
        w.comment(f"general input, variable {p.variable}")
    w.quantity("af", p.af, fractions=False)
    w.quantity("eps0", series.eps0)
    for m in series.orders():
        w.text()
        w.comment(f"m = {m}")
        w.quantity(f"Y_{m}", series.Y[m])
    w.text()
    w.cpu("computation & simplification", series.cpu_seconds.get("compute", 0.0))
    return w.dump()


# -- coupled -------------------------------------------------------------------------


def coupled_report(job, series, spec: RenderSpec, appended: str = None) -> str:
    p = series.problem
    f = series.frame
    w = _Writer(spec)
    w.comment(f"job {job.name}: corrections for a coupled pair of equations")
    for name in ("R11", "R12", "R21", "R22"):
        w.quantity(name, getattr(p, name), fractions=False)
    w.quantity("af", p.af, fractions=False)
    if p.automatic:
        binds = ", ".join(f"{k} -> {render(v)}" for k, v in p.parrepls.items())
        w.comment(f"parrepls = {binds}")
    else:
        w.comment("*** Non-automatic calculation ***")
    w.comment(f"branch = {p.branch}")
    w.quantity("Delta", f.Delta, fractions=False)
    w.comment(f"signQsq = {f.signQsq}")
    w.quantity("Qsq", f.Qsq, fractions=False)
    w.quantity("eps0", f.eps0)
    w.quantity("Q", f.Q, fractions=False)
    w.quantity("s02/s01", f.s02os01, fractions=False)
    w.quantity("g", f.g_factor, fractions=False)
    w.quantity("theta", f.theta, fractions=False)
    w.vector("s0v", f.s0v, fractions=False)
    w.vector("spv", f.spv, fractions=False)
    w.quantity("D", f.den, fractions=False)
    w.comment(f"theory = {p.theory}, {'hermitian' if p.hermitian else 'non-hermitian'}")
    limit = p.simplify_max_order
    for m in series.orders():
        simplified = limit is None or m <= limit
        w.text()
        w.comment(f"m = {m}" + ("" if simplified else " (not simplified)"))
        w.quantity(f"Y_{m}", series.Y[m], simplified)
        w.quantity(f"cp_{m}", series.cpf[m], simplified)
        w.quantity(f"c_{m}", series.cf[m], simplified)
    w.text()
    w.cpu("computation & simplification", series.cpu_seconds.get("compute", 0.0))
    text = w.dump()
    if appended:
        text += "\n" + appended
    return text


# -- abstract b vectors --------------------------------------------------------------


def bvm_report(job, series, spec: RenderSpec) -> str:
    w = _Writer(spec)
    w.comment(f"job {job.name}: abstract vectors b_m, variable {series.variable}"
              + (", Y_1 = 0" if series.y1_zero else ""))
    for m in sorted(series.bv):
        w.text()
        w.comment(f"m = {m}")
        w.quantity(f"bv_{m}", series.bv[m])
    w.text()
    w.cpu("computation & simplification", series.cpu_seconds.get("compute", 0.0))
    return w.dump()


# -- appended numeric evaluation -------------------------------------------------------


def coupled_quantities(series) -> dict:
    """Symbol name -> Expr for the quantities a script may reference."""
    f = series.frame
    q = {"Q": f.Q, "Qsq": f.Qsq, "eps0": f.eps0, "Delta": f.Delta, "sqrtDel": f.sqrtDel,
         "theta": f.theta, "D": f.den}
    for m in series.orders():
        q[f"Y_{m}"] = series.Y[m]
        q[f"cp_{m}"] = series.cpf[m]
        q[f"c_{m}"] = series.cf[m]
    return {k: v for k, v in q.items() if v is not None}


def _referenced(e):
    return {n.args[0] for n in walk(e) if n.kind == SYM}


def _numeric(e, ctx):
    return e.value if e.kind == NUM else jet_eval(e, 0, 0, ctx=ctx).c[0]


def evaluate_script(script, quantities, var="x", dps=30):
    """(shows, prints): symbolic text pairs and numeric (label, complex) pairs.

    Quantities are substituted by name, the script definitions are applied
    and the result is evaluated at the parrepls values in ``dps``-digit
    arithmetic, so that cancellation cannot eat the double-precision result.
    """
    ctx = MpContext(dps)
    shows, prints = [], []
    known = set(quantities) | set(script.parrepls) | {var}
    for label, e in script.shows + script.prints:
        missing = sorted(_referenced(e) - known)
        if missing:
            raise ScriptError(f"undefined quantity {missing[0]!r} in {label!r}")
    for label, e in script.shows:
        shows.append((label, together(simplify(substitute(e, quantities)))))
    if script.prints and var not in script.parrepls:
        raise ScriptError(f"parrepls must give a value for {var}")
    with mpmath.workdps(dps):
        params = {k: _numeric(as_expr(v), ctx) for k, v in script.parrepls.items()}
        x0 = params.pop(var, None)
        for label, e in script.prints:
            full = substitute(e, quantities)
            try:
                val = jet_eval(full, x0, 0, params, script.functions, var=var, ctx=ctx).c[0]
            except UnboundSymbol as exc:
                raise ScriptError(f"{label}: {exc}") from None
            except KeyError as exc:
                raise ScriptError(f"{label}: undefined function {exc}") from None
            prints.append((label, complex(val)))
    return shows, prints


def _format_complex(z: complex):
    if z.imag == 0:
        return f"{z.real:.15g}"
    if z.real == 0:
        return f"{z.imag:.15g}*i"
    sign = "+" if z.imag >= 0 else "-"
    return f"{z.real:.15g} {sign} {abs(z.imag):.15g}*i"


def appended_section(shows, prints, spec: RenderSpec) -> str:
    if not shows and not prints:
        return ""
    w = _Writer(spec)
    w.comment("appended evaluation")
    for label, e in shows:
        w.quantity(label, e, fractions=False)
    for label, z in prints:
        w.comment(f"{label} = {_format_complex(z)}")
    return w.dump()


def write_result(out_dir, job_name, spec: RenderSpec, text) -> Path:
    out = Path(out_dir) / f"{job_name}{SUFFIX[spec.form]}"
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(text)
    return out

