"""
Control-affine system description: model evaluators, fault set, state and input domains.
"""

from typing import Callable, List, Optional, Sequence

import numpy as np
from scipy.optimize import linprog

from models.base_model import BaseModel
from models.errors import ConfigurationError, ContractViolation, EvaluationError

StateFunction = Callable[[np.ndarray], np.ndarray]
FaultFunction = Callable[[np.ndarray, np.ndarray], np.ndarray]
FaultColumnsFunction = Callable[[np.ndarray, np.ndarray], List[np.ndarray]]


class NonlinearModel(BaseModel):
    """Continuous-time control-affine model x' = f(x) + g(x, phi) u with an Euler step dt"""

    _fields = ["name", "n", "p", "dt", "active_states"]

    def __init__(
        self,
        name: str,
        n: int,
        p: int,
        f_eval: StateFunction,
        g_eval: FaultFunction,
        df_dx: StateFunction,
        dg_dx_cols: FaultColumnsFunction,
        dt: float,
        active_states: Optional[Sequence[int]] = None
    ):
        """
        Initialize a model

        Args:
            name: Registry name of the model
            n: State dimension
            p: Input dimension
            f_eval: Drift, state -> state derivative
            g_eval: Input matrix, (state, fault vector) -> n x p
            df_dx: Drift Jacobian, state -> n x n
            dg_dx_cols: Per-column state Jacobians of g, used for Lipschitz estimation only
            dt: Euler step in seconds
            active_states: State coordinates the Jacobians depend on (all when omitted)
        """
        if n < 1 or p < 1:
            raise ConfigurationError(f"model {name} needs n >= 1 and p >= 1, got n={n}, p={p}")
        if not dt > 0:
            raise ConfigurationError(f"model {name} needs dt > 0, got {dt}")
        self.name = name
        self.n = n
        self.p = p
        self.f_eval = f_eval
        self.g_eval = g_eval
        self.df_dx = df_dx
        self.dg_dx_cols = dg_dx_cols
        self.dt = float(dt)
        self.active_states = list(range(n)) if active_states is None else sorted(int(i) for i in active_states)
        if any(i < 0 or i >= n for i in self.active_states):
            raise ConfigurationError(f"active state index out of range for model {name}")

    def rhs(self, x: np.ndarray, u: np.ndarray, phi: np.ndarray) -> np.ndarray:
        """Continuous-time right-hand side f(x) + g(x, phi) u"""
        return self.f_eval(x) + self.g_eval(x, phi) @ u

    def nominal_fault(self) -> np.ndarray:
        return np.ones(self.p)

    def __repr__(self) -> str:
        return f"NonlinearModel(name={self.name!r}, n={self.n}, p={self.p}, dt={self.dt})"


class FaultSet(BaseModel):
    """Single-actuator efficiency faults: at most one entry of phi below 1"""

    _fields = ["p"]

    def __init__(self, p: int):
        if p < 1:
            raise ConfigurationError(f"fault set needs p >= 1, got {p}")
        self.p = p

    @property
    def subproblems(self) -> List[int]:
        """One subproblem per actuator; subproblem i frees phi_i in [0, 1]"""
        return list(range(self.p))

    def fault_vector(self, subproblem: int, phi_i: float) -> np.ndarray:
        if not 0 <= subproblem < self.p:
            raise ContractViolation(f"subproblem {subproblem} out of range for p={self.p}")
        if not 0.0 <= phi_i <= 1.0:
            raise ContractViolation(f"fault efficiency {phi_i} outside [0, 1]")
        phi = np.ones(self.p)
        phi[subproblem] = phi_i
        return phi

    def contains(self, phi: np.ndarray) -> bool:
        phi = np.asarray(phi, dtype=float)
        if phi.shape != (self.p,):
            return False
        if np.any(phi < 0.0) or np.any(phi > 1.0):
            return False
        return int(np.count_nonzero(phi < 1.0)) <= 1


class StatePolytope(BaseModel):
    """State domain D = {x : L x <= 1} with an axis-aligned bounding box"""

    _fields = ["L", "lower", "upper"]
    _array_fields = ["L", "lower", "upper"]

    def __init__(self, L: np.ndarray, lower: Optional[np.ndarray] = None, upper: Optional[np.ndarray] = None):
        L = np.atleast_2d(np.asarray(L, dtype=float))
        if L.shape[0] < 1:
            raise ConfigurationError("state polytope needs at least one row")
        if not np.all(np.isfinite(L)):
            raise ConfigurationError("state polytope rows must be finite")
        self.L = L
        tight_lower, tight_upper = self._tight_box(L)
        if lower is None or upper is None:
            self.lower, self.upper = tight_lower, tight_upper
        else:
            self.lower = np.asarray(lower, dtype=float)
            self.upper = np.asarray(upper, dtype=float)
            tol = 1e-9 * (1.0 + np.abs(tight_lower) + np.abs(tight_upper))
            if np.any(self.lower > tight_lower + tol) or np.any(self.upper < tight_upper - tol):
                raise ConfigurationError("bounding box does not contain the state polytope")

    @classmethod
    def from_box(cls, lower: Sequence[float], upper: Sequence[float]) -> 'StatePolytope':
        """Build the polytope of a box that contains the origin in its interior"""
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ConfigurationError("box bounds must be vectors of equal length")
        if np.any(lower >= 0.0) or np.any(upper <= 0.0):
            raise ConfigurationError("box must contain the origin in its interior (lower < 0 < upper)")
        n = lower.size
        eye = np.eye(n)
        L = np.vstack([eye / upper[:, None], -eye / np.abs(lower)[:, None]])
        return cls(L, lower, upper)

    @staticmethod
    def _tight_box(L: np.ndarray):
        n = L.shape[1]
        lower = np.empty(n)
        upper = np.empty(n)
        ones = np.ones(L.shape[0])
        for k in range(n):
            for sign, target in ((1.0, lower), (-1.0, upper)):
                c = np.zeros(n)
                c[k] = sign
                res = linprog(c, A_ub=L, b_ub=ones, bounds=[(None, None)] * n, method="highs")
                if res.status == 3:
                    raise ConfigurationError(f"state polytope is unbounded along x{k + 1}")
                if res.status != 0:
                    raise ConfigurationError(f"state polytope bound LP failed: {res.message}")
                target[k] = sign * res.fun
        return lower, upper

    @property
    def n(self) -> int:
        return self.L.shape[1]

    @property
    def rows(self) -> int:
        return self.L.shape[0]

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.upper - self.lower))

    def contains(self, x: np.ndarray, tol: float = 1e-12) -> bool:
        return bool(np.all(self.L @ np.asarray(x, dtype=float) <= 1.0 + tol))


class InputBox(BaseModel):
    """Componentwise saturation thresholds"""

    _fields = ["u_max"]
    _array_fields = ["u_max"]

    def __init__(self, u_max: np.ndarray):
        u_max = np.atleast_1d(np.asarray(u_max, dtype=float))
        if u_max.ndim != 1 or u_max.size < 1:
            raise ConfigurationError("u_max must be a non-empty vector")
        if not np.all(np.isfinite(u_max)) or np.any(u_max <= 0.0):
            raise ConfigurationError(f"every saturation threshold must be positive and finite, got {u_max.tolist()}")
        self.u_max = u_max

    @property
    def p(self) -> int:
        return self.u_max.size


class JacobianPair(BaseModel):
    """Discrete-time Jacobian pair (A, B) and the (x, phi) sample that generated it"""

    _fields = ["A", "B", "x", "phi"]
    _array_fields = ["A", "B", "x", "phi"]

    def __init__(self, A: np.ndarray, B: np.ndarray, x: Optional[np.ndarray] = None, phi: Optional[np.ndarray] = None):
        self.A = np.atleast_2d(np.asarray(A, dtype=float))
        self.B = np.atleast_2d(np.asarray(B, dtype=float))
        self.x = None if x is None else np.asarray(x, dtype=float)
        self.phi = None if phi is None else np.asarray(phi, dtype=float)
        for label, matrix in (("A", self.A), ("B", self.B)):
            bad = np.argwhere(~np.isfinite(matrix))
            if bad.size:
                i, j = bad[0]
                raise EvaluationError(f"non-finite Jacobian entry {label}[{i},{j}] = {matrix[i, j]}")
        if self.A.shape[0] != self.A.shape[1] or self.B.shape[0] != self.A.shape[0]:
            raise ConfigurationError(f"inconsistent Jacobian shapes A{self.A.shape} B{self.B.shape}")

    def distance(self, other: 'JacobianPair') -> float:
        """Combined operator-norm distance ||A - A'|| + ||B - B'||"""
        return float(np.linalg.norm(self.A - other.A, 2) + np.linalg.norm(self.B - other.B, 2))


class LipschitzBounds(BaseModel):
    """Lipschitz constants of the Jacobian maps x -> A and (x, phi) -> B"""

    _fields = ["kappa_A", "kappa_B", "certified", "safety_factor", "samples", "kappa_B_state"]

    def __init__(
        self,
        kappa_A: float,
        kappa_B: float,
        certified: bool,
        safety_factor: Optional[float] = None,
        samples: Optional[int] = None,
        kappa_B_state: Optional[float] = None
    ):
        """
        Args:
            kappa_A: Constant of x -> A(x)
            kappa_B: Constant of (x, phi) -> B(x, phi)
            certified: True for closed-form or user-supplied constants
            safety_factor: Inflation applied to a sampled estimate
            samples: Number of sampled points behind an estimate
            kappa_B_state: Constant of x -> B(x, phi) alone; kappa_B when unknown
        """
        if not (kappa_A >= 0.0 and kappa_B >= 0.0):
            raise ConfigurationError(f"Lipschitz bounds must be nonnegative, got {kappa_A}, {kappa_B}")
        if kappa_B_state is not None and not 0.0 <= kappa_B_state <= kappa_B:
            raise ConfigurationError(f"state Lipschitz bound of B must lie in [0, kappa_B], got {kappa_B_state}")
        self.kappa_A = float(kappa_A)
        self.kappa_B = float(kappa_B)
        self.certified = bool(certified)
        self.safety_factor = safety_factor
        self.samples = samples
        self.kappa_B_state = None if kappa_B_state is None else float(kappa_B_state)

    @property
    def state_kappa_B(self) -> float:
        return self.kappa_B if self.kappa_B_state is None else self.kappa_B_state

    @property
    def provenance(self) -> str:
        return "analytic" if self.certified else "estimate-based"
