"""
Records of the learner / verifier loop: configuration, sample store, candidates and outcomes.
"""

from enum import Enum
from typing import Any, Dict, List, Optional

import numpy as np

from models.base_model import BaseModel, to_plain
from models.errors import ConfigurationError
from models.system_models import InputBox, JacobianPair

LIPSCHITZ_SCALES = ("eta", "candidate")


class VerifierSettings(BaseModel):
    """Termination and work-sharing settings of the branch-and-bound verifier"""

    _fields = ["diam_tol_rel", "max_evaluations", "batch_size", "lipschitz_scale", "threads"]

    def __init__(
        self,
        diam_tol_rel: float = 1e-4,
        max_evaluations: int = 1_000_000,
        batch_size: int = 256,
        lipschitz_scale: str = "eta",
        threads: int = 4
    ):
        if not diam_tol_rel > 0:
            raise ConfigurationError(f"diam_tol_rel must be positive, got {diam_tol_rel}")
        if max_evaluations < 1 or batch_size < 1 or threads < 1:
            raise ConfigurationError("max_evaluations, batch_size and threads must be at least 1")
        if lipschitz_scale not in LIPSCHITZ_SCALES:
            raise ConfigurationError(f"lipschitz_scale must be one of {LIPSCHITZ_SCALES}, got {lipschitz_scale!r}")
        self.diam_tol_rel = float(diam_tol_rel)
        self.max_evaluations = int(max_evaluations)
        self.batch_size = int(batch_size)
        self.lipschitz_scale = lipschitz_scale
        self.threads = int(threads)


class CegisConfig(BaseModel):
    """Hyperparameters of the synthesis loop"""

    _fields = ["eta", "epsilon", "tau", "max_iterations", "dt", "solver_tol",
               "prune_interior_samples", "verifier"]

    def __init__(
        self,
        eta: float = 50.0,
        epsilon: float = 1e-4,
        tau: float = 0.999,
        max_iterations: int = 50,
        dt: float = 0.01,
        solver_tol: float = 1e-8,
        prune_interior_samples: bool = False,
        verifier: Optional[VerifierSettings] = None
    ):
        if not epsilon > 0:
            raise ConfigurationError(f"epsilon must be positive, got {epsilon}")
        if not eta >= epsilon:
            raise ConfigurationError(f"eta must be at least epsilon, got eta={eta}, epsilon={epsilon}")
        if not 0.0 <= tau <= 1.0:
            raise ConfigurationError(f"tau must lie in [0, 1], got {tau}")
        if max_iterations < 1:
            raise ConfigurationError(f"max_iterations must be at least 1, got {max_iterations}")
        if not dt > 0 or not solver_tol > 0:
            raise ConfigurationError("dt and solver_tol must be positive")
        self.eta = float(eta)
        self.epsilon = float(epsilon)
        self.tau = float(tau)
        self.max_iterations = int(max_iterations)
        self.dt = float(dt)
        self.solver_tol = float(solver_tol)
        self.prune_interior_samples = bool(prune_interior_samples)
        self.verifier = verifier or VerifierSettings()

    @property
    def separation(self) -> float:
        """Minimum distance of a fresh counterexample from every stored sample"""
        return self.epsilon / self.eta


class SampleSet(BaseModel):
    """Ordered store of Jacobian pairs with the iteration that added each one"""

    _fields = ["pairs", "tags"]

    def __init__(self, pairs: Optional[List[JacobianPair]] = None, tags: Optional[List[int]] = None):
        self.pairs: List[JacobianPair] = list(pairs or [])
        self.tags: List[int] = list(tags or [0] * len(self.pairs))

    def __len__(self) -> int:
        return len(self.pairs)

    def __iter__(self):
        return iter(self.pairs)

    def min_distance(self, pair: JacobianPair) -> float:
        if not self.pairs:
            return float("inf")
        return min(pair.distance(stored) for stored in self.pairs)

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> 'SampleSet':
        pairs = [JacobianPair.from_dict(item) for item in data.get("pairs", [])]
        return cls(pairs, data.get("tags"))


class LearnerSolution(BaseModel):
    """Optimal (Q, Y, Z) of the learner SDP"""

    _fields = ["Q", "Y", "Z", "objective"]
    _array_fields = ["Q", "Y", "Z"]

    def __init__(self, Q: np.ndarray, Y: np.ndarray, Z: np.ndarray, objective: Optional[float] = None):
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.Y = np.atleast_2d(np.asarray(Y, dtype=float))
        self.Z = np.atleast_2d(np.asarray(Z, dtype=float))
        self.objective = float(np.trace(self.Q)) if objective is None else float(objective)


class Controller(BaseModel):
    """Static gain with its invariant ellipsoid x' P x <= 1"""

    _fields = ["K", "H", "P", "Q", "u_max", "certificate"]
    _array_fields = ["K", "H", "P", "Q", "u_max"]

    def __init__(
        self,
        K: np.ndarray,
        H: np.ndarray,
        P: np.ndarray,
        Q: np.ndarray,
        u_max: np.ndarray,
        certificate: Optional[Dict[str, Any]] = None
    ):
        self.K = np.atleast_2d(np.asarray(K, dtype=float))
        self.H = np.atleast_2d(np.asarray(H, dtype=float))
        self.P = np.atleast_2d(np.asarray(P, dtype=float))
        self.Q = np.atleast_2d(np.asarray(Q, dtype=float))
        self.u_max = np.atleast_1d(np.asarray(u_max, dtype=float))
        self.certificate = certificate

    @property
    def n(self) -> int:
        return self.K.shape[1]

    @property
    def p(self) -> int:
        return self.K.shape[0]

    @property
    def box(self) -> InputBox:
        return InputBox(self.u_max)

    def as_solution(self) -> LearnerSolution:
        """Recover (Q, Y, Z) = (Q, K Q, H Q) for re-verification"""
        return LearnerSolution(self.Q, self.K @ self.Q, self.H @ self.Q)


class OutcomeKind(str, Enum):
    CONVERGED = "converged"
    INFEASIBLE = "infeasible"
    BUDGET = "budget"
    UNDECIDED = "undecided"


class IterationRecord(BaseModel):
    """Summary of one learner + verifier round"""

    _fields = ["iteration", "sample_count", "trace_q", "lambda_star", "counterexample", "duration"]

    def __init__(
        self,
        iteration: int,
        sample_count: int,
        trace_q: Optional[float] = None,
        lambda_star: Optional[float] = None,
        counterexample: Optional[Dict[str, Any]] = None,
        duration: float = 0.0
    ):
        self.iteration = iteration
        self.sample_count = sample_count
        self.trace_q = trace_q
        self.lambda_star = lambda_star
        self.counterexample = counterexample
        self.duration = duration


class CegisOutcome(BaseModel):
    """Result of a synthesis run"""

    _fields = ["kind", "iterations", "controller", "certificate", "history", "samples", "gap", "message"]

    def __init__(
        self,
        kind: OutcomeKind,
        iterations: int,
        history: List[IterationRecord],
        samples: SampleSet,
        controller: Optional[Controller] = None,
        certificate: Optional[Any] = None,
        gap: Optional[float] = None,
        message: str = ""
    ):
        self.kind = kind
        self.iterations = iterations
        self.history = history
        self.samples = samples
        self.controller = controller
        self.certificate = certificate
        self.gap = gap
        self.message = message

    @property
    def converged(self) -> bool:
        return self.kind == OutcomeKind.CONVERGED

    def summary(self) -> Dict[str, Any]:
        return {
            "kind": self.kind.value,
            "iterations": self.iterations,
            "samples": len(self.samples),
            "gap": to_plain(self.gap),
            "message": self.message,
        }
