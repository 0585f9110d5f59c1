import cvxpy as cp
import numpy as np
import pytest

from src.config import settings
from src.errors import SolverError, SpecError
from src.services.conic import ConicProgram, bisect_feasibility, is_feasible, real_embedding, solve


def test_largest_eigenvalue_program():
    a = np.array([[2.0, 1.0], [1.0, 2.0]])
    program = ConicProgram("lambda_max")
    t = program.scalar("t")
    program.psd(t * np.eye(2) - a)
    program.minimize(t)
    result = solve(program)
    assert result.optimal
    assert result.objective == pytest.approx(3.0, abs=1e-6)
    assert result.report.status == "optimal"
    assert result.report.primal_residual is not None
    assert result.report.certified
    assert result.report.dual_residual <= 1e-6
    assert result.report.gap <= 1e-6


def test_hermitian_variable_is_symmetrized():
    rho = np.array([[0.5, 0.5j], [-0.5j, 0.5]])
    program = ConicProgram("projection")
    x = program.hermitian("X", 2)
    program.psd(x)
    program.minimize(cp.norm(x - rho, "fro"))
    result = solve(program)
    value = result["X"]
    assert np.allclose(value, value.conj().T)
    assert np.allclose(value, rho, atol=1e-5)


def test_infeasible_program_raises_with_report():
    program = ConicProgram("impossible")
    x = program.nonneg("x")
    program.equal(x, -1.0)
    program.minimize(x)
    with pytest.raises(SolverError) as info:
        solve(program)
    assert info.value.report.status == "infeasible"
    assert info.value.exit_code == 2


def test_infeasible_program_without_raising():
    program = ConicProgram("impossible")
    x = program.nonneg("x")
    program.equal(x, -1.0)
    assert not is_feasible(program)


def test_duplicate_variable_and_missing_objective():
    program = ConicProgram("broken")
    program.scalar("t")
    with pytest.raises(SpecError):
        program.scalar("t")
    with pytest.raises(SpecError):
        program.problem()


def test_bisection_finds_threshold():
    assert bisect_feasibility(lambda x: x >= 0.3, 0.0, 1.0, tol=1e-6) == pytest.approx(0.3, abs=1e-6)


def test_bisection_edges():
    assert bisect_feasibility(lambda x: True, 1.0, 2.0) == 1.0
    with pytest.raises(SolverError):
        bisect_feasibility(lambda x: False, 0.0, 1.0)
    with pytest.raises(SpecError):
        bisect_feasibility(lambda x: True, 2.0, 1.0)


def test_real_embedding_doubles_spectrum():
    h = np.array([[1.0, 1j], [-1j, 3.0]])
    embedded = real_embedding(h)
    assert np.allclose(embedded, embedded.T)
    expected = np.sort(np.repeat(np.linalg.eigvalsh(h), 2))
    assert np.allclose(np.linalg.eigvalsh(embedded), expected)


def test_residual_above_tolerance_is_not_optimal(monkeypatch):
    monkeypatch.setattr(settings, "residual_tol", -1.0)
    a = np.diag([1.0, 2.0])
    program = ConicProgram("lambda_max")
    t = program.scalar("t")
    program.psd(t * np.eye(2) - a)
    program.minimize(t)
    with pytest.raises(SolverError) as info:
        solve(program)
    assert info.value.report.status == "inaccurate"
    assert not info.value.report.certified

    result = solve(program, raise_on_failure=False)
    assert not result.optimal
    assert result.report.objective == pytest.approx(2.0, abs=1e-5)


def test_inaccurate_solve_counts_as_infeasible(monkeypatch):
    monkeypatch.setattr(settings, "residual_tol", -1.0)
    program = ConicProgram("trivial")
    x = program.nonneg("x")
    program.leq(x, 1.0)
    assert not is_feasible(program)


def test_gap_reflects_complementary_slackness():
    program = ConicProgram("box")
    x = program.scalar("x")
    program.leq(x, 2.0)
    program.leq(-x, 1.0)
    program.maximize(x)
    result = solve(program)
    assert result.objective == pytest.approx(2.0, abs=1e-6)
    assert result.report.gap == pytest.approx(0.0, abs=1e-6)
    assert result.report.dual_residual == pytest.approx(0.0, abs=1e-6)
