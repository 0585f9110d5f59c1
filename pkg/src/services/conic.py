"""Small dense semidefinite programs on top of cvxpy.

A ``ConicProgram`` collects Hermitian and non-negative variable blocks, PSD and
equality constraints, and a linear objective; ``solve`` compiles it to a
``cvxpy.Problem`` and returns a ``SolveReport`` together with the variable
values.
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional

import cvxpy as cp
import numpy as np

from ..config import settings
from ..errors import SolverError, SpecError
from ..models.reports import SolveReport

logger = logging.getLogger(__name__)

_SOLVED = {cp.OPTIMAL, cp.OPTIMAL_INACCURATE}
_INFEASIBLE = {cp.INFEASIBLE, cp.INFEASIBLE_INACCURATE, cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE}


def _solver_options(solver: str, tol: float, max_iter: int) -> dict:
    if solver == "CLARABEL":
        return {
            "tol_gap_abs": tol,
            "tol_gap_rel": tol,
            "tol_feas": tol,
            "max_iter": min(max_iter, 10000),
        }
    if solver == "SCS":
        return {"eps": tol, "max_iters": max_iter}
    return {}


def real_embedding(m):
    """[[Re M, -Im M], [Im M, Re M]] for arrays or cvxpy expressions."""
    if isinstance(m, cp.Expression):
        return cp.bmat([[cp.real(m), -cp.imag(m)], [cp.imag(m), cp.real(m)]])
    m = np.asarray(m)
    return np.block([[m.real, -m.imag], [m.imag, m.real]])


@dataclass
class SolveResult:
    report: SolveReport
    values: dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def optimal(self) -> bool:
        return self.report.status == "optimal"

    @property
    def objective(self) -> float:
        return float(self.report.objective)

    def __getitem__(self, name: str) -> np.ndarray:
        return self.values[name]


class ConicProgram:
    """Declarative builder for a dense SDP."""

    def __init__(self, name: str = "program"):
        self.name = name
        self.variables: dict[str, cp.Variable] = {}
        self.constraints: list[cp.Constraint] = []
        self._objective: Optional[cp.Minimize | cp.Maximize] = None

    def _declare(self, name: str, var: cp.Variable) -> cp.Variable:
        if name in self.variables:
            raise SpecError(f"Variable '{name}' declared twice in {self.name}")
        self.variables[name] = var
        return var

    def hermitian(self, name: str, n: int) -> cp.Variable:
        return self._declare(name, cp.Variable((n, n), hermitian=True, name=name))

    def symmetric(self, name: str, n: int) -> cp.Variable:
        return self._declare(name, cp.Variable((n, n), symmetric=True, name=name))

    def nonneg(self, name: str, shape=()) -> cp.Variable:
        return self._declare(name, cp.Variable(shape, nonneg=True, name=name))

    def scalar(self, name: str) -> cp.Variable:
        return self._declare(name, cp.Variable(name=name))

    def psd(self, expr) -> None:
        """Require the Hermitian part of ``expr`` to be PSD."""
        self.constraints.append(((expr + expr.H) / 2) >> 0)

    def equal(self, lhs, rhs) -> None:
        self.constraints.append(lhs == rhs)

    def leq(self, lhs, rhs) -> None:
        self.constraints.append(lhs <= rhs)

    def minimize(self, expr) -> None:
        self._objective = cp.Minimize(cp.real(expr))

    def maximize(self, expr) -> None:
        self._objective = cp.Maximize(cp.real(expr))

    def feasibility(self) -> None:
        self._objective = cp.Minimize(0)

    def problem(self) -> cp.Problem:
        if self._objective is None:
            raise SpecError(f"Program {self.name} has no objective")
        return cp.Problem(self._objective, self.constraints)


def _primal_residual(constraints: list[cp.Constraint]) -> float:
    worst = 0.0
    for constraint in constraints:
        try:
            violation = np.max(np.atleast_1d(constraint.violation()))
        except (ValueError, TypeError):
            continue
        worst = max(worst, float(violation))
    return worst


def _dual_certificate(constraints: list[cp.Constraint]) -> tuple[Optional[float], Optional[float]]:
    """Dual cone violation and complementary slackness of the constraint duals.

    For a cone constraint X in K with dual Y the products <Y, X> sum to the
    duality gap; equality constraints contribute nothing.
    """
    dual_residual, gap, seen = 0.0, 0.0, False
    for constraint in constraints:
        dual = constraint.dual_value
        if dual is None or isinstance(constraint, (cp.constraints.Equality, cp.constraints.Zero)):
            continue
        dual = np.asarray(dual)
        if isinstance(constraint, cp.constraints.PSD):
            dual = (dual + np.conj(dual).T) / 2
            dual_residual = max(dual_residual, -float(np.min(np.linalg.eigvalsh(dual))))
            value = constraint.args[0].value
            if value is not None and np.shape(value) == dual.shape:
                gap += abs(float(np.real(np.trace(dual @ np.asarray(value)))))
        elif isinstance(constraint, cp.constraints.Inequality):
            dual = np.real(dual)
            dual_residual = max(dual_residual, -float(np.min(dual)))
            value = constraint.expr.value
            if value is not None:
                gap += float(np.sum(np.abs(dual * np.real(np.asarray(value)))))
        else:
            continue
        seen = True
    if not seen:
        return None, None
    return max(dual_residual, 0.0), gap


def _run(problem: cp.Problem, solver: str, tol: float, max_iter: int) -> None:
    problem.solve(solver=solver, **_solver_options(solver, tol, max_iter))


def solve(
    program: ConicProgram,
    tol: Optional[float] = None,
    max_iter: Optional[int] = None,
    raise_on_failure: bool = True,
) -> SolveResult:
    """Solve ``program``; on a non-optimal status raise SolverError unless told otherwise.

    A solve only counts as optimal when the solver reports full accuracy and
    the recomputed primal residual is within ``settings.residual_tol``;
    anything weaker is reported as ``inaccurate``.
    """
    tol = settings.solver_tol if tol is None else tol
    max_iter = settings.solver_max_iter if max_iter is None else max_iter
    problem = program.problem()
    solver = settings.solver.upper()

    try:
        _run(problem, solver, tol, max_iter)
    except cp.error.SolverError as e:
        if solver == "SCS":
            raise SolverError(f"{program.name}: solver failed ({e})") from e
        logger.warning(f"{program.name}: {solver} failed ({e}), retrying with SCS")
        solver = "SCS"
        try:
            _run(problem, solver, tol, max_iter)
        except cp.error.SolverError as retry_error:
            raise SolverError(f"{program.name}: solver failed ({retry_error})") from retry_error

    objective = primal_residual = None
    if problem.status in _SOLVED:
        objective = float(problem.value)
        primal_residual = _primal_residual(program.constraints)
        if problem.status == cp.OPTIMAL and primal_residual <= settings.residual_tol:
            status = "optimal"
        else:
            status = "inaccurate"
            logger.warning(
                f"{program.name}: solver reported {problem.status} "
                f"with primal residual {primal_residual:.3e}"
            )
    elif problem.status in _INFEASIBLE:
        status = "infeasible"
    else:
        status = "maxIter"

    dual_residual, gap = _dual_certificate(program.constraints)
    if status == "optimal":
        scale = settings.residual_tol * (1.0 + abs(objective))
        certified = dual_residual is None or (dual_residual <= scale and gap <= scale)
    else:
        certified = status == "infeasible" and dual_residual is not None

    stats = problem.solver_stats
    report = SolveReport(
        status=status,
        objective=objective,
        primal_residual=primal_residual,
        dual_residual=dual_residual,
        gap=gap if status in ("optimal", "inaccurate") else None,
        certified=certified,
        iterations=int(stats.num_iters or 0) if stats is not None else 0,
        solver=solver,
        solve_time=stats.solve_time if stats is not None else None,
    )
    logger.debug(
        f"{program.name}: status={status} objective={report.objective} gap={report.gap} "
        f"iterations={report.iterations} solver={solver}"
    )

    if status != "optimal" and raise_on_failure:
        raise SolverError(f"{program.name}: solver status {problem.status}", report=report)

    values = {}
    if status in ("optimal", "inaccurate"):
        for name, var in program.variables.items():
            value = var.value
            if value is None:
                continue
            value = np.asarray(value)
            if var.attributes.get("hermitian"):
                value = (value + np.conj(value).T) / 2
            values[name] = value
    return SolveResult(report=report, values=values)


def is_feasible(program: ConicProgram) -> bool:
    program.feasibility()
    return solve(program, raise_on_failure=False).optimal


def bisect_feasibility(
    predicate: Callable[[float], bool],
    lo: float,
    hi: float,
    tol: Optional[float] = None,
) -> float:
    """Smallest value in [lo, hi] at which a monotone predicate holds, within ``tol``.

    Raises:
        SolverError: if the predicate fails at ``hi``.
    """
    tol = settings.bisection_tol if tol is None else tol
    if lo > hi:
        raise SpecError(f"Empty bisection bracket [{lo}, {hi}]")
    if not predicate(hi):
        raise SolverError(f"Predicate infeasible at upper bracket {hi}")
    if predicate(lo):
        return lo
    steps = 0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if predicate(mid):
            hi = mid
        else:
            lo = mid
        steps += 1
    logger.debug(f"Bisection converged to {hi:.9f} after {steps} steps")
    return hi
