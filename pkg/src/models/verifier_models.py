"""
Verifier problem data and results.
"""

from typing import List, Optional

import numpy as np

from models.base_model import BaseModel
from models.ldi_models import SignMatrixSet
from models.synthesis_models import LearnerSolution, VerifierSettings
from models.system_models import FaultSet, JacobianPair, LipschitzBounds, NonlinearModel, StatePolytope


class VerifierProblem:
    """Everything a subproblem search needs; read-only once built"""

    def __init__(
        self,
        candidate: LearnerSolution,
        model: NonlinearModel,
        polytope: StatePolytope,
        fault_set: FaultSet,
        signs: SignMatrixSet,
        lipschitz: LipschitzBounds,
        lipschitz_state: float,
        lipschitz_fault: float,
        tau: float,
        settings: VerifierSettings
    ):
        self.candidate = candidate
        self.model = model
        self.polytope = polytope
        self.fault_set = fault_set
        self.signs = signs
        self.lipschitz = lipschitz
        self.lipschitz_state = lipschitz_state
        self.lipschitz_fault = lipschitz_fault
        self.tau = tau
        self.settings = settings
        self.mixed_gains = signs.mixed_gains(candidate.Y, candidate.Z)

    @property
    def search_lower(self) -> np.ndarray:
        """Lower corner of the (active state, phi_i) search box"""
        return np.append(self.polytope.lower[self.model.active_states], 0.0)

    @property
    def search_upper(self) -> np.ndarray:
        return np.append(self.polytope.upper[self.model.active_states], 1.0)

    def embed_state(self, active: np.ndarray) -> np.ndarray:
        """Place active-coordinate values into a full state vector (inactive coordinates at 0)"""
        x = np.zeros(self.model.n)
        x[self.model.active_states] = active
        return x


class SearchResult(BaseModel):
    """Outcome of the branch-and-bound search on one subproblem"""

    _fields = ["subproblem", "lambda_star", "argmin", "j", "certified_bound", "evaluations", "regions"]
    _array_fields = ["argmin"]

    def __init__(
        self,
        subproblem: int,
        lambda_star: float,
        argmin: np.ndarray,
        j: int,
        certified_bound: float,
        evaluations: int,
        regions: int
    ):
        self.subproblem = subproblem
        self.lambda_star = lambda_star
        self.argmin = argmin
        self.j = j
        self.certified_bound = certified_bound
        self.evaluations = evaluations
        self.regions = regions


class Certificate(BaseModel):
    """No point of D x Phi makes the certificate matrix indefinite"""

    _fields = ["lambda_star", "certified_bound", "certified", "subproblem_bounds", "evaluations"]

    def __init__(
        self,
        lambda_star: float,
        certified_bound: float,
        certified: bool,
        subproblem_bounds: List[float],
        evaluations: int = 0
    ):
        self.lambda_star = lambda_star
        self.certified_bound = certified_bound
        self.certified = certified
        self.subproblem_bounds = subproblem_bounds
        self.evaluations = evaluations

    @property
    def provenance(self) -> str:
        return "analytic" if self.certified else "estimate-based"


class Counterexample(BaseModel):
    """Falsifying Jacobian pair with the point that produced it"""

    _fields = ["pair", "lambda_value", "x", "phi", "subproblem", "j"]

    def __init__(
        self,
        pair: JacobianPair,
        lambda_value: float,
        x: np.ndarray,
        phi: np.ndarray,
        subproblem: int,
        j: int,
        evaluations: Optional[int] = None
    ):
        self.pair = pair
        self.lambda_value = lambda_value
        self.x = x
        self.phi = phi
        self.subproblem = subproblem
        self.j = j
        self.evaluations = evaluations

    def summary(self) -> dict:
        return {
            "lambda_value": self.lambda_value,
            "x": self.x.tolist(),
            "phi": self.phi.tolist(),
            "subproblem": self.subproblem,
            "j": self.j,
        }
