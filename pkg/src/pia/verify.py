"""Symbolic results evaluated at points next to the jet oracle."""

from __future__ import annotations

from .expr import evaluate
from .oracle import compare, coupled_corrections_jet, scalar_corrections_jet


def scalar_rows(series, x0, params, functions=None):
    """(symbolic values, jet values) keyed by quantity name at x0."""
    p = series.problem
    env = dict(params)
    env[p.var] = x0
    sym = {"eps0": evaluate(series.eps0, env, functions)}
    sym.update({f"Y_{m}": evaluate(series.Y[m], env, functions) for m in series.orders()})
    jets = scalar_corrections_jet(p, x0, params, functions)
    num = {"eps0": jets["eps0"].value}
    num.update({f"Y_{m}": jets["Y"][m].value for m in series.orders()})
    return sym, num


def coupled_initial(series, anchor, params, functions=None):
    """Symbolic theta and c_m at the anchor, used to start the quadrature."""
    env = dict(params)
    env[series.problem.var] = anchor
    init = {m: evaluate(series.cf[m], env, functions) for m in series.cf}
    theta = series.frame.theta
    if theta is not None:
        init["theta"] = evaluate(theta, env, functions)
    return init


def coupled_rows(series, x0, params, functions=None, anchor=None, initial=None):
    p = series.problem
    env = dict(params)
    env[p.var] = x0
    sym, num = {}, {}
    if initial is None and anchor is not None:
        initial = coupled_initial(series, anchor, params, functions)
    jets = coupled_corrections_jet(p, x0, params, functions, anchor=anchor, initial=initial)
    for m in series.orders():
        for name, e, j in ((f"Y_{m}", series.Y[m], jets.Y[m]),
                           (f"cp_{m}", series.cpf[m], jets.cpf[m]),
                           (f"c_{m}", series.cf[m], jets.cf[m])):
            if j is None:
                # c_m is identically 0 in the simplified theory
                continue
            sym[name] = evaluate(e, env, functions)
            num[name] = j.value
    return sym, num


def verify_points(series, points, params, functions=None, anchor=None, rel_tol=1e-10):
    """List of (point, CompareReport)."""
    out = []
    scalar = not hasattr(series, "frame")
    initial = None
    if not scalar and anchor is not None:
        initial = coupled_initial(series, anchor, params, functions)
    for x0 in points:
        if scalar:
            sym, num = scalar_rows(series, x0, params, functions)
        else:
            sym, num = coupled_rows(series, x0, params, functions, anchor, initial)
        out.append((x0, compare(sym, num, rel_tol)))
    return out
