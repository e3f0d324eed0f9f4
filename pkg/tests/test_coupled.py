import pytest

from pia.calculus import simplify
from pia.coupled import CoupledProblem, abstract_b_vectors, coupled_corrections
from pia.errors import DegenerateEigenproblem, SignUndeterminable, ZeroDenominator
from pia.expr import ZERO, add, evaluate, mul
from pia.jobs import coupled_problem, load_fixture, params_of, read_append, read_script
from pia.parse import parse_expr
from pia.verify import verify_points


def _functions(job):
    text = read_append(job)
    return read_script(text).functions if text else None


@pytest.mark.parametrize("name", ["A", "B", "D", "X"])
@pytest.mark.parametrize("branch", ["minus", "plus"])
def test_symbolic_matches_jets(name, branch):
    job = load_fixture(name)
    s = coupled_corrections(coupled_problem(job, branch=branch, mmax=3))
    results = verify_points(s, job.get("points")[:3], params_of(job), _functions(job),
                            job.get("anchor"), 1e-9)
    for x0, rep in results:
        assert rep.passed, f"{name} {branch} at {x0}:\n{rep.format()}"


@pytest.mark.parametrize("name,branch,theory", [
    ("A", "minus", "fulling"), ("B", "plus", "wronskian"),
])
def test_integrated_theories_match_jets_with_quadrature(name, branch, theory):
    job = load_fixture(name)
    s = coupled_corrections(coupled_problem(job, branch=branch, mmax=2, theory=theory))
    results = verify_points(s, [1.8, 2.4], params_of(job), None, job.get("anchor"), 1e-8)
    for x0, rep in results:
        assert rep.passed, rep.format()


def test_non_hermitian_coupling_has_first_order_term():
    job = load_fixture("D")
    params = params_of(job)
    for br in ("minus", "plus"):
        s = coupled_corrections(coupled_problem(job, branch=br, mmax=1))
        vals = [abs(evaluate(s.Y[1], {**params, "x": x0})) for x0 in job.get("points")]
        assert max(vals) > 1e-6


def test_non_hermitian_formulas_force_simplified_theory():
    p = CoupledProblem(R11="x", R12="1", R21="1", R22="2*x", hermitian=False, theory="fulling",
                       parrepls={"x": 2})
    assert p.theory == "simplified"


def test_coincident_eigenvalues_are_rejected():
    p = CoupledProblem(R11="x", R12="0", R21="0", R22="x", parrepls={"x": 2})
    with pytest.raises(DegenerateEigenproblem):
        coupled_corrections(p)


def test_diagonal_problem_has_no_eigenvector_ratio():
    p = CoupledProblem(R11="x", R12="0", R21="0", R22="2*x", parrepls={"x": 2})
    with pytest.raises((DegenerateEigenproblem, ZeroDenominator)):
        coupled_corrections(p)


def test_automatic_sign_needs_bindings():
    p = CoupledProblem(R11="x", R12="1", R21="1", R22="2*x")
    with pytest.raises(SignUndeterminable):
        coupled_corrections(p)


@pytest.mark.parametrize("kw", [
    dict(R11="x", R12="1", R21="1"),
    dict(R11="x", R12="1", R21="1", R22="x", branch="up"),
    dict(R11="x", R12="1", R21="1", R22="x", theory="exact"),
    dict(R11="x", R12="1", R21="1", R22="x", automatic=False),
    dict(R11="x", R12="1", R21="1", R22="x", mmax=0),
])
def test_problem_validation(kw):
    with pytest.raises(ValueError):
        CoupledProblem(**kw)


def test_abstract_b2_in_zeta_variable():
    s = abstract_b_vectors(mmax=2, variable="zeta", y1_zero=True)
    want = parse_expr("sv0''(z)/2 + i*sv1'(z) + eps0(z)*sv0(z)/2")
    assert simplify(add(s.bv[2], mul(-1, want))) is ZERO


def test_abstract_b1_is_derivative_of_leading_vector():
    s = abstract_b_vectors(mmax=1, variable="x")
    assert s.bv[1] is parse_expr("i*sv0'(x)/Q(x)")


def test_abstract_vectors_exist_up_to_mmax():
    s = abstract_b_vectors(mmax=3, variable="x")
    assert sorted(s.bv) == [1, 2, 3]
    assert "Y1" in str(s.bv[2])
    assert "Y1" not in str(abstract_b_vectors(mmax=2, variable="x", y1_zero=True).bv[2])
