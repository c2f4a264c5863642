import logging
from typing import Dict, Optional, Tuple

import cvxpy as cp
import numpy as np

from config.settings import FTC_SOLVER, FTC_FALLBACK_SOLVER, FTC_SOLVER_TOL
from solver.problem import AffineExpr, SdpOutcome, SdpProblem, SdpStatus

logger = logging.getLogger(__name__)

# Residual slack, in units of tol, accepted on an "optimal" answer
RESIDUAL_FACTOR = 10.0


def _tolerance_options(solver: str, tol: float) -> dict:
    if solver == "CLARABEL":
        return {"tol_gap_abs": tol, "tol_gap_rel": tol, "tol_feas": tol}
    if solver == "SCS":
        return {"eps_abs": tol, "eps_rel": tol}
    if solver == "CVXOPT":
        return {"abstol": tol, "reltol": tol, "feastol": tol}
    return {}


class SdpSolverClient:
    """Translates SdpProblem descriptions into cvxpy and solves them"""

    def __init__(self, solver: str = FTC_SOLVER, fallback: Optional[str] = FTC_FALLBACK_SOLVER):
        self.solver = solver
        self.fallback = fallback

    def _build(self, problem: SdpProblem):
        variables = {
            name: cp.Variable(v.shape, symmetric=v.symmetric, name=name)
            for name, v in problem.variables.items()
        }

        def expression(expr: AffineExpr):
            result = np.zeros(expr.shape) if expr.constant is None else expr.constant
            for term in expr.terms:
                value = variables[term.variable]
                value = value.T if term.transpose else value
                if term.left is not None:
                    value = term.left @ value
                if term.right is not None:
                    value = value @ term.right
                result = result + term.scale * value
            return result

        constraints = []
        for constraint in problem.constraints:
            sizes = constraint.block_sizes
            grid = [[None] * len(sizes) for _ in sizes]
            for i in range(len(sizes)):
                for j in range(len(sizes)):
                    if (max(i, j), min(i, j)) not in constraint.blocks:
                        grid[i][j] = np.zeros((sizes[i], sizes[j]))
            for (i, j), expr in constraint.blocks.items():
                block = expression(expr)
                grid[i][j] = block
                if i != j:
                    grid[j][i] = block.T
            lmi = cp.bmat(grid)
            constraints.append(0.5 * (lmi + lmi.T) >> 0)

        objective = sum(cp.sum(cp.multiply(weight, variables[name])) for name, weight in problem.objective)
        return cp.Problem(cp.Maximize(objective), constraints), variables

    def _solve_once(self, problem: SdpProblem, solver: str, tol: float) -> Tuple[SdpStatus, Dict[str, np.ndarray]]:
        program, variables = self._build(problem)
        try:
            program.solve(solver=solver, **_tolerance_options(solver, tol))
        except (cp.SolverError, ValueError, ArithmeticError) as e:
            logger.warning(f"SDP backend {solver} failed on {problem.name}: {str(e)}")
            return SdpStatus(SdpOutcome.NUMERICAL_FAILURE, solver=solver, detail=str(e)), {}

        status = program.status
        if status in (cp.INFEASIBLE,):
            return SdpStatus(SdpOutcome.INFEASIBLE, solver=solver, detail=status), {}
        if status in (cp.UNBOUNDED, cp.UNBOUNDED_INACCURATE):
            return SdpStatus(SdpOutcome.UNBOUNDED, solver=solver, detail=status), {}
        if status not in (cp.OPTIMAL, cp.OPTIMAL_INACCURATE):
            return SdpStatus(SdpOutcome.NUMERICAL_FAILURE, solver=solver, detail=str(status)), {}

        values = {}
        for name, variable in variables.items():
            if variable.value is None:
                return SdpStatus(SdpOutcome.NUMERICAL_FAILURE, solver=solver, detail="missing variable value"), {}
            value = np.asarray(variable.value, dtype=float).reshape(problem.variables[name].shape)
            if problem.variables[name].symmetric:
                value = 0.5 * (value + value.T)
            values[name] = value

        residuals = problem.residuals(values)
        worst = min(residuals.values()) if residuals else 0.0
        slack = RESIDUAL_FACTOR * tol * max(1.0, max((np.max(np.abs(v)) for v in values.values()), default=1.0))
        if worst < -slack:
            logger.warning(
                f"SDP backend {solver} returned {status} on {problem.name} "
                f"but the worst constraint residual is {worst:.3e}"
            )
            return SdpStatus(SdpOutcome.NUMERICAL_FAILURE, residuals=residuals, solver=solver,
                             detail=f"residual {worst:.3e} below -{slack:.1e}"), values
        return SdpStatus(SdpOutcome.OPTIMAL, problem.objective_value(values), residuals, solver, status), values

    def solve_sdp(self, problem: SdpProblem, tol: float = FTC_SOLVER_TOL) -> Tuple[SdpStatus, Dict[str, np.ndarray]]:
        """
        Solve a problem, retrying once on the fallback backend with a relaxed tolerance

        Args:
            problem: Problem description
            tol: Feasibility and duality-gap tolerance

        Returns:
            Tuple of (status, variable values); values are empty unless the status is optimal
        """
        if not tol > 0:
            raise ValueError(f"solver tolerance must be positive, got {tol}")
        problem.validate()
        status, values = self._solve_once(problem, self.solver, tol)
        if status.outcome == SdpOutcome.NUMERICAL_FAILURE and self.fallback:
            relaxed = tol * 100.0
            logger.info(f"Retrying {problem.name} with {self.fallback} at tol={relaxed:.1e}")
            status, values = self._solve_once(problem, self.fallback, relaxed)
        if status.outcome != SdpOutcome.OPTIMAL:
            values = {}
        logger.debug(f"{problem.name}: {status.outcome.value} via {status.solver} (objective {status.objective})")
        return status, values


# Create a singleton instance
sdp_solver = SdpSolverClient()
