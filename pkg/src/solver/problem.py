"""
Backend-neutral semidefinite program description.

A problem holds matrix variables, block-structured affine LMIs and a linear
objective to maximize. Each LMI lists its lower-triangle blocks as affine
expressions; the upper triangle is the transpose. Backends (see solver.client)
translate this description, and the same description evaluates numerically so
solver output can be re-checked without trusting the backend.
"""

import logging
from enum import Enum
from typing import Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from models.base_model import BaseModel
from models.errors import AssemblyError, ContractViolation

logger = logging.getLogger(__name__)


class MatrixVariable(BaseModel):
    _fields = ["name", "shape", "symmetric"]

    def __init__(self, name: str, shape: Tuple[int, int], symmetric: bool = False):
        if symmetric and shape[0] != shape[1]:
            raise AssemblyError(f"symmetric variable {name} must be square, got {shape}")
        self.name = name
        self.shape = (int(shape[0]), int(shape[1]))
        self.symmetric = symmetric

    @property
    def size(self) -> int:
        return self.shape[0] * self.shape[1]


class AffineTerm:
    """scale * left @ V @ right, with V transposed when requested"""

    def __init__(
        self,
        variable: str,
        left: Optional[np.ndarray] = None,
        right: Optional[np.ndarray] = None,
        transpose: bool = False,
        scale: float = 1.0
    ):
        self.variable = variable
        self.left = None if left is None else np.atleast_2d(np.asarray(left, dtype=float))
        self.right = None if right is None else np.atleast_2d(np.asarray(right, dtype=float))
        self.transpose = transpose
        self.scale = float(scale)

    def shape(self, var_shape: Tuple[int, int]) -> Tuple[int, int]:
        rows, cols = (var_shape[1], var_shape[0]) if self.transpose else var_shape
        if self.left is not None:
            if self.left.shape[1] != rows:
                raise AssemblyError(f"left factor {self.left.shape} does not match {self.variable} ({rows} rows)")
            rows = self.left.shape[0]
        if self.right is not None:
            if self.right.shape[0] != cols:
                raise AssemblyError(f"right factor {self.right.shape} does not match {self.variable} ({cols} cols)")
            cols = self.right.shape[1]
        return rows, cols

    def evaluate(self, value: np.ndarray) -> np.ndarray:
        result = value.T if self.transpose else value
        if self.left is not None:
            result = self.left @ result
        if self.right is not None:
            result = result @ self.right
        return self.scale * result


class AffineExpr:
    """constant + sum of affine terms"""

    def __init__(self, shape: Tuple[int, int], constant: Optional[np.ndarray] = None,
                 terms: Optional[List[AffineTerm]] = None):
        self.shape = (int(shape[0]), int(shape[1]))
        self.constant = None if constant is None else np.atleast_2d(np.asarray(constant, dtype=float))
        self.terms = list(terms or [])
        if self.constant is not None and self.constant.shape != self.shape:
            raise AssemblyError(f"constant {self.constant.shape} does not match block shape {self.shape}")

    @classmethod
    def const(cls, matrix: np.ndarray) -> 'AffineExpr':
        matrix = np.atleast_2d(np.asarray(matrix, dtype=float))
        return cls(matrix.shape, matrix)

    def plus(self, term: AffineTerm) -> 'AffineExpr':
        self.terms.append(term)
        return self

    def evaluate(self, values: Dict[str, np.ndarray]) -> np.ndarray:
        result = np.zeros(self.shape) if self.constant is None else self.constant.copy()
        for term in self.terms:
            result = result + term.evaluate(values[term.variable])
        return result


class LmiConstraint:
    """Block matrix required to be positive semidefinite"""

    def __init__(self, name: str, block_sizes: Sequence[int], blocks: Dict[Tuple[int, int], AffineExpr]):
        self.name = name
        self.block_sizes = [int(s) for s in block_sizes]
        for (i, j) in blocks:
            if i < j:
                raise AssemblyError(f"constraint {name}: block ({i},{j}) is above the diagonal")
        self.blocks = blocks

    @property
    def size(self) -> int:
        return sum(self.block_sizes)

    def offsets(self) -> List[int]:
        return list(np.cumsum([0] + self.block_sizes))

    def evaluate(self, values: Dict[str, np.ndarray]) -> np.ndarray:
        offsets = self.offsets()
        matrix = np.zeros((self.size, self.size))
        for (i, j), expr in self.blocks.items():
            block = expr.evaluate(values)
            matrix[offsets[i]:offsets[i + 1], offsets[j]:offsets[j + 1]] = block
            if i != j:
                matrix[offsets[j]:offsets[j + 1], offsets[i]:offsets[i + 1]] = block.T
        # Diagonal blocks may carry rounding asymmetry from products like A Q
        return 0.5 * (matrix + matrix.T)


class SdpOutcome(str, Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    NUMERICAL_FAILURE = "numerical_failure"


class SdpStatus(BaseModel):
    """Solver outcome with per-constraint minimum-eigenvalue residuals"""

    _fields = ["outcome", "objective", "residuals", "solver", "detail"]

    def __init__(
        self,
        outcome: SdpOutcome,
        objective: Optional[float] = None,
        residuals: Optional[Dict[str, float]] = None,
        solver: Optional[str] = None,
        detail: str = ""
    ):
        self.outcome = outcome
        self.objective = objective
        self.residuals = residuals or {}
        self.solver = solver
        self.detail = detail

    @property
    def optimal(self) -> bool:
        return self.outcome == SdpOutcome.OPTIMAL

    @property
    def worst_residual(self) -> float:
        return min(self.residuals.values()) if self.residuals else float("inf")


class SdpProblem:
    """Maximize sum_k <C_k, V_k> subject to block LMIs"""

    def __init__(self, name: str = "sdp"):
        self.name = name
        self.variables: Dict[str, MatrixVariable] = {}
        self.constraints: List[LmiConstraint] = []
        self.objective: List[Tuple[str, np.ndarray]] = []

    def add_variable(self, name: str, shape: Tuple[int, int], symmetric: bool = False) -> MatrixVariable:
        if name in self.variables:
            raise AssemblyError(f"variable {name} declared twice")
        variable = MatrixVariable(name, shape, symmetric)
        self.variables[name] = variable
        return variable

    def add_constraint(self, constraint: LmiConstraint) -> None:
        self._check_constraint(constraint)
        self.constraints.append(constraint)

    def maximize(self, variable: str, weight: np.ndarray) -> None:
        """Add <weight, variable> to the objective"""
        if variable not in self.variables:
            raise AssemblyError(f"objective uses undeclared variable {variable}")
        weight = np.atleast_2d(np.asarray(weight, dtype=float))
        if weight.shape != self.variables[variable].shape:
            raise AssemblyError(f"objective weight {weight.shape} does not match {variable}")
        self.objective.append((variable, weight))

    def _check_constraint(self, constraint: LmiConstraint) -> None:
        sizes = constraint.block_sizes
        for (i, j), expr in constraint.blocks.items():
            if i >= len(sizes):
                raise AssemblyError(f"constraint {constraint.name}: block row {i} out of range")
            expected = (sizes[i], sizes[j])
            if expr.shape != expected:
                raise AssemblyError(
                    f"constraint {constraint.name}: block ({i},{j}) has shape {expr.shape}, expected {expected}"
                )
            for term in expr.terms:
                if term.variable not in self.variables:
                    raise AssemblyError(f"constraint {constraint.name} uses undeclared variable {term.variable}")
                if term.shape(self.variables[term.variable].shape) != expected:
                    raise AssemblyError(
                        f"constraint {constraint.name}: a {term.variable} term in block ({i},{j}) "
                        f"does not produce shape {expected}"
                    )

    def validate(self) -> None:
        if not self.objective:
            raise ContractViolation(f"problem {self.name} has an empty objective")
        for constraint in self.constraints:
            self._check_constraint(constraint)

    def objective_value(self, values: Dict[str, np.ndarray]) -> float:
        return float(sum(np.sum(weight * values[name]) for name, weight in self.objective))

    def residuals(self, values: Dict[str, np.ndarray]) -> Dict[str, float]:
        """Minimum eigenvalue of every constraint at the given assignment"""
        return {c.name: float(np.linalg.eigvalsh(c.evaluate(values))[0]) for c in self.constraints}

    def count(self, prefix: str) -> int:
        return sum(1 for c in self.constraints if c.name.startswith(prefix))

    def _scalar_basis(self):
        """Yield (index, variable, value) for every free scalar of every variable"""
        index = 0
        for variable in self.variables.values():
            rows, cols = variable.shape
            for r in range(rows):
                for c in range(cols):
                    if variable.symmetric and c < r:
                        continue
                    unit = np.zeros(variable.shape)
                    unit[r, c] = 1.0
                    if variable.symmetric:
                        unit[c, r] = 1.0
                    index += 1
                    yield index, variable, unit

    def dump_triplets(self, stream: TextIO) -> None:
        """
        Write the problem as sparse triplets for offline cross-checking

        Lines are `o <k> <value>` for objective coefficients and
        `c <constraint> <k> <row> <col> <value>` for upper-triangle entries of
        F_k, where the constraint is F_0 + sum_k x_k F_k >= 0 and k = 0 is the
        constant term. Indices are 1-based.
        """
        zeros = {name: np.zeros(v.shape) for name, v in self.variables.items()}
        stream.write(f"# {self.name}: {len(self.variables)} matrix variables, {len(self.constraints)} LMIs\n")
        basis = list(self._scalar_basis())
        for index, variable, unit in basis:
            stream.write(f"# x{index} = {variable.name}{tuple(int(i) for i in np.argwhere(unit)[0])}\n")
        for index, variable, unit in basis:
            coefficient = float(sum(np.sum(w * unit) for name, w in self.objective if name == variable.name))
            if coefficient != 0.0:
                stream.write(f"o {index} {coefficient!r}\n")
        for number, constraint in enumerate(self.constraints, start=1):
            constant = constraint.evaluate(zeros)
            self._write_matrix(stream, number, 0, constant)
            for index, variable, unit in basis:
                values = dict(zeros)
                values[variable.name] = unit
                self._write_matrix(stream, number, index, constraint.evaluate(values) - constant)

    @staticmethod
    def _write_matrix(stream: TextIO, constraint: int, index: int, matrix: np.ndarray) -> None:
        rows, cols = np.nonzero(np.triu(matrix))
        for r, c in zip(rows, cols):
            stream.write(f"c {constraint} {index} {r + 1} {c + 1} {float(matrix[r, c])!r}\n")

    def __repr__(self) -> str:
        return f"SdpProblem(name={self.name!r}, variables={list(self.variables)}, constraints={len(self.constraints)})"
