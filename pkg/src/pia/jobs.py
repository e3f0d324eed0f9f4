"""Job files: ``key = value`` lines with ``#`` comments.

Expressions use the parser's syntax.  ``define = f(x) := body`` lines add
macro definitions that are expanded in every expression field, and
``parrepls``/``params`` take ``name -> expression`` lists.  The companion
append script (``append = file``) is read by ``read_script``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

from .coupled import CoupledProblem
from .errors import (
    ExprSyntaxError, JobFileError, MissingRequiredField, ScriptError, TypeMismatch, UnknownKey,
)
from .expr import Expr, as_expr, evaluate, substitute
from .parse import parse_expr
from .render import RenderSpec
from .scalar import ScalarProblem

KINDS = ("scalar", "coupled", "bvm")

_BOOL = {"y": True, "yes": True, "true": True, "1": True,
         "n": False, "no": False, "false": False, "0": False}

_CHOICES = {
    "variable": {"x": "x", "z": "zeta", "zeta": "zeta"},
    "input_mode": {"i": "explicit", "explicit": "explicit", "g": "general", "general": "general"},
    "branch": {"m": "minus", "minus": "minus", "p": "plus", "plus": "plus"},
    "hermitian": {"h": True, "hermitian": True, "n": False, "nonhermitian": False},
    "theory": {"s": "simplified", "simplified": "simplified", "f": "fulling",
               "fulling": "fulling", "w": "wronskian", "wronskian": "wronskian"},
    "output": {"o": "plain", "plain": "plain", "t": "tex", "tex": "tex",
               "f": "fortran", "fortran": "fortran"},
    "fractions": {"s": "simple", "simple": "simple", "c": "common", "common": "common",
                  "n": "none", "none": "none"},
}

_EXPR = ("R", "af", "R11", "R12", "R21", "R22", "g_factor", "g_factor_m", "g_factor_p",
         "Delta", "sqrtDel", "eps0")
_INT = ("nmax", "mmax", "signQsq", "simplify_max_order")
_FLAGS = ("normalize", "trig_expand", "y1_zero", "automatic", "integrate_theta", "simplify")
_COMMON = ("kind", "output", "fractions", "positive", "define", "params", "points", "anchor",
           "simplify", "append")

KEYS = {
    "scalar": _COMMON + ("R", "af", "nmax", "variable", "input_mode", "eps0"),
    "coupled": _COMMON + ("R11", "R12", "R21", "R22", "af", "mmax", "branch", "hermitian",
                          "theory", "normalize", "trig_expand", "automatic", "integrate_theta",
                          "g_factor", "g_factor_m", "g_factor_p", "parrepls", "Delta",
                          "sqrtDel", "signQsq", "eps0", "simplify_max_order"),
    "bvm": _COMMON + ("mmax", "variable", "y1_zero"),
}

DEFAULTS = {
    "af": "0", "input_mode": "explicit", "variable": "x", "branch": "minus", "hermitian": True,
    "theory": "simplified", "normalize": False, "trig_expand": False, "automatic": True,
    "y1_zero": False, "integrate_theta": True, "simplify": True, "nmax": 2, "mmax": 2,
    "output": "plain", "fractions": "none",
}

_DEF = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(\s*([A-Za-z_][A-Za-z0-9_]*)\s*\)\s*:=\s*(.+)$")
_LINE = re.compile(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*?)\s*$")


@dataclass
class JobFile:
    kind: str
    values: dict
    name: str = "job"
    base: Path = None
    functions: dict = field(default_factory=dict)

    def get(self, key, default=None):
        return self.values.get(key, default)

    @property
    def render(self) -> RenderSpec:
        var = "z" if self.values.get("variable") == "zeta" else "x"
        return RenderSpec(self.values["output"], self.values["fractions"], var)


def _strip_comment(line):
    return line.split("#", 1)[0].rstrip()


def parse_definition(text, lineno=None):
    m = _DEF.match(text)
    where = f"line {lineno}: " if lineno else ""
    if not m:
        raise TypeMismatch(f"{where}expected 'name(param) := expression', got {text!r}")
    name, param, body = m.groups()
    try:
        return name, (param, parse_expr(body))
    except ExprSyntaxError as exc:
        raise TypeMismatch(f"{where}bad definition body: {exc}") from None


def parse_bindings(text, what="bindings"):
    """'x -> 2, k -> 4/100' (or with '=') to {name: Expr}."""
    out = {}
    if not text.strip():
        return out
    for part in text.split(","):
        m = re.match(r"^\s*([A-Za-z_][A-Za-z0-9_]*)\s*(?:->|=)\s*(.+?)\s*$", part)
        if not m:
            raise TypeMismatch(f"bad {what} entry {part.strip()!r}; expected 'name -> value'")
        try:
            out[m.group(1)] = parse_expr(m.group(2))
        except ExprSyntaxError as exc:
            raise TypeMismatch(f"bad value in {what}: {exc}") from None
    return out


def _convert(key, raw, lineno):
    where = f"line {lineno}: {key}"
    if key in _EXPR:
        try:
            return parse_expr(raw)
        except ExprSyntaxError as exc:
            raise TypeMismatch(f"{where}: {exc}") from None
    if key in _INT:
        try:
            return int(raw)
        except ValueError:
            raise TypeMismatch(f"{where}: expected an integer, got {raw!r}") from None
    if key in _FLAGS:
        try:
            return _BOOL[raw.lower()]
        except KeyError:
            raise TypeMismatch(f"{where}: expected y/n, got {raw!r}") from None
    if key in _CHOICES:
        try:
            return _CHOICES[key][raw.lower()]
        except KeyError:
            allowed = "/".join(_CHOICES[key])
            raise TypeMismatch(f"{where}: expected one of {allowed}, got {raw!r}") from None
    if key in ("parrepls", "params"):
        return parse_bindings(raw, key)
    if key == "positive":
        names = [n.strip() for n in raw.split(",") if n.strip()]
        for n in names:
            if not re.fullmatch(r"[A-Za-z_][A-Za-z0-9_]*", n) or n == "i":
                raise TypeMismatch(f"{where}: bad symbol name {n!r}")
        return tuple(names)
    if key == "points":
        try:
            return tuple(float(evaluate(parse_expr(p)).real) for p in raw.split(",") if p.strip())
        except Exception as exc:
            raise TypeMismatch(f"{where}: expected numbers ({exc})") from None
    if key == "anchor":
        try:
            return float(evaluate(parse_expr(raw)).real)
        except Exception as exc:
            raise TypeMismatch(f"{where}: expected a number ({exc})") from None
    return raw


def parse_job(text, name="job", base=None) -> JobFile:
    raw = {}
    defines = []
    lines = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _strip_comment(line)
        if not line.strip():
            continue
        m = _LINE.match(line)
        if not m:
            raise TypeMismatch(f"line {lineno}: expected 'key = value', got {line.strip()!r}")
        key, value = m.groups()
        if key == "define":
            defines.append((value, lineno))
            continue
        if key in raw:
            raise TypeMismatch(f"line {lineno}: duplicate key {key!r}")
        raw[key] = value
        lines[key] = lineno
    if "kind" not in raw:
        raise MissingRequiredField("missing required field 'kind'")
    kind = raw["kind"].lower()
    if kind not in KINDS:
        raise TypeMismatch(f"line {lines['kind']}: kind must be one of {', '.join(KINDS)}")
    allowed = set(KEYS[kind])
    for key in raw:
        if key not in allowed:
            raise UnknownKey(f"line {lines[key]}: unknown key {key!r} for a {kind} job")
    functions = dict(parse_definition(text, n) for text, n in defines)
    values = dict(DEFAULTS)
    for key, value in raw.items():
        if key == "kind":
            continue
        values[key] = _convert(key, value, lines[key])
    values["af"] = as_expr(values["af"]) if isinstance(values["af"], Expr) else parse_expr(values["af"])
    if functions:
        for key in _EXPR:
            if isinstance(values.get(key), Expr):
                values[key] = substitute(values[key], functions=functions)
    values["kind"] = kind
    _require(kind, values)
    return JobFile(kind, values, name, Path(base) if base else None, functions)


def _require(kind, v):
    need = []
    if kind == "scalar" and v.get("input_mode") == "explicit":
        need = ["R"]
    elif kind == "coupled":
        need = ["R11", "R12", "R21", "R22"]
        if not v.get("automatic", True):
            need += ["Delta", "sqrtDel", "signQsq"]
    for key in need:
        if key not in v:
            raise MissingRequiredField(f"missing required field {key!r}")


def read_job(path) -> JobFile:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise JobFileError(f"cannot read job file {path}: {exc}") from None
    return parse_job(text, path.stem, path.parent)


FIXTURES = ("parabolic", "budden", "A", "B", "C1", "C2", "C3", "C4", "D", "E", "X")


def fixture_text(name, suffix=".job"):
    if name not in FIXTURES:
        raise JobFileError(f"unknown example {name!r}; choose from {', '.join(FIXTURES)}")
    return resources.files("pia").joinpath("fixtures", name + suffix).read_text()


def load_fixture(name) -> JobFile:
    job = parse_job(fixture_text(name), name)
    job.base = None
    return job


def read_append(job: JobFile):
    """Text of the job's appended script, or None."""
    ref = job.get("append")
    if not ref:
        return None
    if job.base is None:
        return resources.files("pia").joinpath("fixtures", ref).read_text()
    try:
        return (job.base / ref).read_text()
    except OSError as exc:
        raise JobFileError(f"cannot read appended script {ref}: {exc}") from None


# -- problems ---------------------------------------------------------------------


def g_factor_for(job: JobFile, branch=None):
    """Branch-specific g factor if given, else g_factor, else 1."""
    v = job.values
    key = "g_factor_m" if (branch or v["branch"]) == "minus" else "g_factor_p"
    if key in v:
        return v[key]
    return v.get("g_factor", as_expr(1))


def scalar_problem(job: JobFile) -> ScalarProblem:
    v = job.values
    try:
        return ScalarProblem(
            R=v.get("R"), af=v["af"], nmax=v["nmax"], input_mode=v["input_mode"],
            variable=v["variable"], eps0=v.get("eps0"),
        )
    except ValueError as exc:
        raise TypeMismatch(str(exc)) from None


def coupled_problem(job: JobFile, **overrides) -> CoupledProblem:
    v = dict(job.values)
    v.update({k: val for k, val in overrides.items() if val is not None})
    g = overrides.get("g_factor") or g_factor_for(job, v["branch"])
    try:
        return CoupledProblem(
            R11=v["R11"], R12=v["R12"], R21=v["R21"], R22=v["R22"], af=v["af"], mmax=v["mmax"],
            branch=v["branch"], automatic=v["automatic"], parrepls=v.get("parrepls", {}),
            Delta=v.get("Delta"), sqrtDel=v.get("sqrtDel"), signQsq=v.get("signQsq"),
            g_factor=g, normalize=v["normalize"], integrate_theta=v["integrate_theta"],
            hermitian=v["hermitian"], theory=v["theory"], trig_expand=v["trig_expand"],
            positive=v.get("positive", ()), eps0=v.get("eps0"),
            simplify_max_order=v.get("simplify_max_order"),
            **({"coefficients": v["coefficients"]} if "coefficients" in v else {}),
        )
    except ValueError as exc:
        raise TypeMismatch(str(exc)) from None


def params_of(job: JobFile) -> dict:
    """Numeric parameter values for verification."""
    return {k: evaluate(e) for k, e in job.values.get("params", {}).items()}


# -- appended scripts ---------------------------------------------------------------


@dataclass
class Script:
    functions: dict = field(default_factory=dict)
    parrepls: dict = field(default_factory=dict)
    shows: list = field(default_factory=list)     # symbolic output (label, Expr)
    prints: list = field(default_factory=list)    # numeric output (label, Expr)


def read_script(text) -> Script:
    """Parse an appended evaluation script.

    Lines: ``name(param) := expr`` (definition), ``parrepls = x -> 55, ...``,
    ``show expr`` (single-fraction symbolic output) and ``print expr``
    (numeric value under parrepls).
    """
    s = Script()
    for lineno, line in enumerate(text.splitlines(), 1):
        line = _strip_comment(line).strip()
        if not line:
            continue
        try:
            if ":=" in line:
                name, d = parse_definition(line, lineno)
                s.functions[name] = d
            elif line.startswith("parrepls"):
                m = _LINE.match(line)
                if not m:
                    raise ScriptError(f"line {lineno}: expected 'parrepls = name -> value, ...'")
                s.parrepls.update(parse_bindings(m.group(2), "parrepls"))
            elif line.split(None, 1)[0] in ("print", "show"):
                word, _, rest = line.partition(" ")
                target = s.prints if word == "print" else s.shows
                target.append((rest.strip(), parse_expr(rest)))
            else:
                raise ScriptError(f"line {lineno}: cannot understand {line!r}")
        except (ExprSyntaxError, JobFileError) as exc:
            raise ScriptError(f"line {lineno}: {exc}") from None
    return s
