"""Batch front end: ``pia scalar|coupled|bvm|verify|examples``.

Exit codes: 0 ok, 2 usage, 3 job file, 4 engine, 5 verification failure.
"""

from __future__ import annotations

import argparse
import sys
import time

from . import report
from .coupled import abstract_b_vectors, coupled_corrections
from .errors import ExprSyntaxError, JobFileError, PiaError, ScriptError
from .jobs import (
    FIXTURES, coupled_problem, fixture_text, load_fixture, params_of, parse_job, read_append,
    read_job, read_script, scalar_problem,
)
from .parse import parse_expr
from .render import RenderSpec
from .scalar import scalar_corrections
from .verify import verify_points

EXIT_OK, EXIT_USAGE, EXIT_JOB, EXIT_ENGINE, EXIT_VERIFY = 0, 2, 3, 4, 5

NMAX_GUARD = 6
MMAX_GUARD = 4


class UsageError(Exception):
    pass


def _yes_no(text):
    v = text.lower()
    if v in ("y", "yes", "true", "1"):
        return True
    if v in ("n", "no", "false", "0"):
        return False
    raise argparse.ArgumentTypeError(f"expected y or n, got {text!r}")


def _add_job_args(p):
    p.add_argument("job", nargs="?", help="job file (key = value lines)")
    p.add_argument("--example", choices=FIXTURES, help="use a bundled example job")
    p.add_argument("--out-dir", default=".", help="directory for result files")
    p.add_argument("--output", choices=("o", "t", "f"), help="plain, TeX or Fortran output")
    p.add_argument("--fractions", choices=("s", "c", "n"),
                   help="partial fractions, common denominator or as computed")
    p.add_argument("--no-guard", action="store_true", help="lift the order guardrails")


def _add_scalar_args(p):
    p.add_argument("--nmax", type=int, help="highest n of Y_2n")
    p.add_argument("--input-mode", choices=("i", "g"), help="explicit R or general Q^2/eps0")
    p.add_argument("--variable", choices=("x", "z"), help="x or the zeta variable")


def _add_coupled_args(p):
    p.add_argument("--mmax", type=int, help="highest order m")
    p.add_argument("--branch", choices=("m", "p"), help="eigenvalue branch")
    p.add_argument("--hermitian", choices=("h", "n"), help="hermitian or non-hermitian formulas")
    p.add_argument("--theory", choices=("s", "f", "w"),
                   help="simplified, Fulling or Wronskian-conserving")
    p.add_argument("--normalize", nargs="?", const=True, type=_yes_no, help="normalize s0v")
    p.add_argument("--trig-expand", nargs="?", const=True, type=_yes_no,
                   help="expand trig functions of the frame")
    p.add_argument("--g-factor", help="factor g(x) of the eigenvector")
    p.add_argument("--simplify-max-order", type=int,
                   help="simplify quantities only up to this order")


def build_parser():
    ap = argparse.ArgumentParser(prog="pia", description="Phase-integral corrections.")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("scalar", help="Y_2n for u'' + R u = 0")
    _add_job_args(p)
    _add_scalar_args(p)

    p = sub.add_parser("coupled", help="Y_m, cp_m, c_m for a coupled pair")
    _add_job_args(p)
    _add_coupled_args(p)

    p = sub.add_parser("bvm", help="abstract vectors b_m")
    _add_job_args(p)
    p.add_argument("--mmax", type=int)
    p.add_argument("--variable", choices=("x", "z"))
    p.add_argument("--y1-zero", nargs="?", const=True, type=_yes_no)

    p = sub.add_parser("verify", help="compare symbolic results with the jet oracle")
    _add_job_args(p)
    _add_scalar_args(p)
    _add_coupled_args(p)
    p.add_argument("--at", type=float, action="append", help="evaluation point (repeatable)")
    p.add_argument("--tol", type=float, default=1e-10, help="relative tolerance")
    p.add_argument("--anchor", type=float, help="start of the c_m quadrature")

    p = sub.add_parser("examples", help="list bundled examples or print one")
    p.add_argument("name", nargs="?", choices=FIXTURES)
    return ap


# -- job assembly --------------------------------------------------------------------


def load_job(args):
    if args.example and args.job:
        raise UsageError("give either a job file or --example, not both")
    if args.example:
        return load_fixture(args.example)
    if args.job:
        return read_job(args.job)
    raise UsageError("a job file or --example is required")


_CHOICE_FLAGS = {
    "input_mode": {"i": "explicit", "g": "general"},
    "variable": {"x": "x", "z": "zeta"},
    "branch": {"m": "minus", "p": "plus"},
    "hermitian": {"h": True, "n": False},
    "theory": {"s": "simplified", "f": "fulling", "w": "wronskian"},
    "output": {"o": "plain", "t": "tex", "f": "fortran"},
    "fractions": {"s": "simple", "c": "common", "n": "none"},
}


def apply_overrides(job, args):
    v = job.values
    for key, table in _CHOICE_FLAGS.items():
        val = getattr(args, key, None)
        if val is not None:
            v[key] = table[val]
    for key in ("nmax", "mmax", "normalize", "trig_expand", "y1_zero", "simplify_max_order"):
        val = getattr(args, key, None)
        if val is not None:
            v[key] = val
    g = getattr(args, "g_factor", None)
    if g:
        g = parse_expr(g)
        v["g_factor"] = g
        v.pop("g_factor_m", None)
        v.pop("g_factor_p", None)
    if not getattr(args, "no_guard", False):
        if job.kind == "scalar" and v["nmax"] > NMAX_GUARD:
            raise UsageError(f"nmax above {NMAX_GUARD} needs --no-guard")
        if job.kind != "scalar" and v["mmax"] > MMAX_GUARD:
            raise UsageError(f"mmax above {MMAX_GUARD} needs --no-guard")
    return job


def _expect_kind(job, kinds):
    if job.kind not in kinds:
        raise JobFileError(f"job {job.name} is a {job.kind} job, expected {' or '.join(kinds)}")


def _script(job):
    text = read_append(job)
    return read_script(text) if text else None


# -- commands --------------------------------------------------------------------------


def run_scalar(job, args, out):
    _expect_kind(job, ("scalar",))
    series = scalar_corrections(scalar_problem(job))
    spec = job.render
    path = report.write_result(args.out_dir, job.name, spec, report.scalar_report(job, series, spec))
    print(f"wrote {path}", file=out)
    return EXIT_OK


def run_appended(job, series, spec):
    """Appended numeric section for the job's script, or ''."""
    script = _script(job)
    if script is None:
        return ""
    shows, prints = report.evaluate_script(script, report.coupled_quantities(series),
                                           series.problem.var)
    return report.appended_section(shows, prints, spec)


def run_coupled(job, args, out):
    _expect_kind(job, ("coupled",))
    series = coupled_corrections(coupled_problem(job))
    spec = job.render
    text = report.coupled_report(job, series, spec, run_appended(job, series, spec))
    path = report.write_result(args.out_dir, job.name, spec, text)
    print(f"wrote {path}", file=out)
    return EXIT_OK


def run_bvm(job, args, out):
    _expect_kind(job, ("bvm",))
    v = job.values
    series = abstract_b_vectors(v["mmax"], v["variable"], v["y1_zero"])
    spec = job.render
    path = report.write_result(args.out_dir, job.name, spec, report.bvm_report(job, series, spec))
    print(f"wrote {path}", file=out)
    return EXIT_OK


def run_verify(job, args, out):
    _expect_kind(job, ("scalar", "coupled"))
    script = _script(job)
    functions = script.functions if script else None
    params = params_of(job)
    points = args.at or job.get("points")
    if not points:
        raise UsageError("no evaluation points: use --at or a points line in the job")
    t0 = time.process_time()
    if job.kind == "scalar":
        series = scalar_corrections(scalar_problem(job))
        anchor = None
    else:
        series = coupled_corrections(coupled_problem(job))
        anchor = args.anchor if args.anchor is not None else job.get("anchor")
    results = verify_points(series, points, params, functions, anchor, args.tol)
    ok = True
    for x0, rep in results:
        print(f"x = {x0}", file=out)
        print(rep.format(), file=out)
        ok = ok and rep.passed
    print(f"{report.CPU_PREFIX} used for verification (seconds): {time.process_time() - t0:.3f}",
          file=out)
    print("verification " + ("passed" if ok else "FAILED"), file=out)
    return EXIT_OK if ok else EXIT_VERIFY


def run_examples(args, out):
    if args.name:
        out.write(fixture_text(args.name))
    else:
        for name in FIXTURES:
            print(name, file=out)
    return EXIT_OK


_COMMANDS = {"scalar": run_scalar, "coupled": run_coupled, "bvm": run_bvm, "verify": run_verify}


def main(argv=None, out=None):
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_USAGE
    try:
        if args.command == "examples":
            return run_examples(args, out)
        if args.command == "bvm" and not (args.job or args.example):
            job = parse_job("kind = bvm\n", "bvm")
        else:
            job = load_job(args)
        apply_overrides(job, args)
        return _COMMANDS[args.command](job, args, out)
    except UsageError as exc:
        print(f"pia: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (JobFileError, ScriptError, ExprSyntaxError) as exc:
        print(f"pia: job error: {exc}", file=sys.stderr)
        return EXIT_JOB
    except PiaError as exc:
        print(f"pia: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_ENGINE


if __name__ == "__main__":
    sys.exit(main())
