"""
Schemas of problem and scenario files.

Both are JSON documents; unknown keys are rejected and every numeric
precondition is checked here, before any computation starts.
"""

import json
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from models.errors import ConfigurationError

THRUSTER_COUNTS = {"auv2": 3, "auv5": 4}
STATE_DIMENSIONS = {"auv2": 2, "auv5": 5}


class StrictSchema(BaseModel):
    model_config = ConfigDict(extra="forbid")


class ThrusterSchema(StrictSchema):
    alpha_deg: float
    lx: float
    ly: float


class AuvParamsSchema(StrictSchema):
    m: float = Field(gt=0)
    J_z: float = Field(gt=0)
    X_u: float = Field(ge=0)
    X_uu: float = Field(ge=0)
    Y_v: float = Field(default=0.0, ge=0)
    Y_vv: float = Field(default=0.0, ge=0)
    N_r: float = Field(ge=0)
    N_rr: float = Field(ge=0)
    thrusters: List[ThrusterSchema] = Field(min_length=1)


class LinearSchema(StrictSchema):
    A: List[List[float]]
    B: List[List[float]]
    discrete: bool = False

    @model_validator(mode="after")
    def check_shapes(self):
        n = len(self.A)
        if n == 0 or any(len(row) != n for row in self.A):
            raise ValueError("A must be a non-empty square matrix")
        if len(self.B) != n or len({len(row) for row in self.B}) != 1 or len(self.B[0]) == 0:
            raise ValueError("B must have one non-empty row per state")
        return self

    @property
    def n(self) -> int:
        return len(self.A)

    @property
    def p(self) -> int:
        return len(self.B[0])


class BoxSchema(StrictSchema):
    lower: List[float]
    upper: List[float]

    @model_validator(mode="after")
    def check_bounds(self):
        if len(self.lower) != len(self.upper) or not self.lower:
            raise ValueError("box bounds must be non-empty and of equal length")
        if any(lo >= hi for lo, hi in zip(self.lower, self.upper)):
            raise ValueError("every box lower bound must be below its upper bound")
        return self


class DomainSchema(StrictSchema):
    """Either an origin-centred box or polytope rows L (D = {x : L x <= 1})"""

    box: Optional[BoxSchema] = None
    rows: Optional[List[List[float]]] = None
    bounding_box: Optional[BoxSchema] = None

    @model_validator(mode="after")
    def check_choice(self):
        if (self.box is None) == (self.rows is None):
            raise ValueError("domain needs exactly one of 'box' or 'rows'")
        if self.box is not None:
            if any(lo >= 0 for lo in self.box.lower) or any(hi <= 0 for hi in self.box.upper):
                raise ValueError("domain box must contain the origin in its interior")
        if self.rows is not None and (not self.rows or len({len(r) for r in self.rows}) != 1):
            raise ValueError("domain rows must be non-empty and of equal length")
        return self

    @property
    def n(self) -> int:
        return len(self.box.lower) if self.box is not None else len(self.rows[0])


class HyperparametersSchema(StrictSchema):
    eta: float = 50.0
    epsilon: float = Field(default=1e-4, gt=0)
    tau: float = Field(default=0.999, ge=0, le=1)
    dt: float = Field(default=0.01, gt=0)
    max_iterations: int = Field(default=50, ge=1)
    solver_tol: float = Field(default=1e-8, gt=0)

    @model_validator(mode="after")
    def check_eta(self):
        if self.eta < self.epsilon:
            raise ValueError(f"eta ({self.eta}) must be at least epsilon ({self.epsilon})")
        return self


class LipschitzSchema(StrictSchema):
    """Explicit constants, closed-form constants (auv2 and linear-test), or a sampled estimate"""

    analytic: bool = False
    kappa_A: Optional[float] = Field(default=None, ge=0)
    kappa_B: Optional[float] = Field(default=None, ge=0)
    samples: int = Field(default=200, ge=2)
    safety_factor: float = Field(default=2.0, ge=1)


class VerifierSchema(StrictSchema):
    diam_tol_rel: float = Field(default=1e-4, gt=0)
    max_evaluations: int = Field(default=1_000_000, ge=1)
    batch_size: int = Field(default=256, ge=2)
    lipschitz_scale: Literal["eta", "candidate"] = "eta"


class LearnerSchema(StrictSchema):
    prune_interior_samples: bool = False


class InitialSampleSchema(StrictSchema):
    x: List[float]
    phi: List[float]


class ProblemConfig(StrictSchema):
    description: str = ""
    model: Literal["auv2", "auv5", "linear-test"]
    params: Optional[AuvParamsSchema] = None
    linear: Optional[LinearSchema] = None
    domain: DomainSchema
    u_max: List[float] = Field(min_length=1)
    hyperparameters: HyperparametersSchema = Field(default_factory=HyperparametersSchema)
    lipschitz: LipschitzSchema = Field(default_factory=LipschitzSchema)
    verifier: VerifierSchema = Field(default_factory=VerifierSchema)
    learner: LearnerSchema = Field(default_factory=LearnerSchema)
    initial_sample: Optional[InitialSampleSchema] = None
    seed: int = 0

    @field_validator("u_max")
    @classmethod
    def check_u_max(cls, value):
        if any(not v > 0 for v in value):
            raise ValueError("every saturation threshold must be positive")
        return value

    @model_validator(mode="after")
    def check_model(self):
        if self.model == "linear-test":
            if self.linear is None:
                raise ValueError("model 'linear-test' needs a 'linear' block")
            n, p = self.linear.n, self.linear.p
        else:
            if self.params is None:
                raise ValueError(f"model '{self.model}' needs a 'params' block")
            if len(self.params.thrusters) != THRUSTER_COUNTS[self.model]:
                raise ValueError(f"model '{self.model}' needs {THRUSTER_COUNTS[self.model]} thrusters")
            n, p = STATE_DIMENSIONS[self.model], THRUSTER_COUNTS[self.model]
        if self.domain.n != n:
            raise ValueError(f"domain has dimension {self.domain.n}, model '{self.model}' has {n} states")
        if len(self.u_max) != p:
            raise ValueError(f"u_max needs {p} entries, got {len(self.u_max)}")
        if self.initial_sample is not None:
            if len(self.initial_sample.x) != n or len(self.initial_sample.phi) != p:
                raise ValueError("initial_sample dimensions do not match the model")
        if self.lipschitz.analytic and self.model == "auv5":
            raise ValueError("no closed-form Lipschitz constants for auv5; give kappa_A and kappa_B or sample")
        return self

    @property
    def n(self) -> int:
        return self.linear.n if self.model == "linear-test" else STATE_DIMENSIONS[self.model]

    @property
    def p(self) -> int:
        return len(self.u_max)


class FaultPhaseSchema(StrictSchema):
    t_start: float = Field(ge=0)
    t_end: float
    phi: List[float]


class ConstantReferenceSchema(StrictSchema):
    kind: Literal["constant"]
    x_ref: List[float]


class SinusoidReferenceSchema(StrictSchema):
    kind: Literal["sinusoid"]
    amplitude: List[float]
    frequency: List[float]
    offset: List[float]


class PiecewiseReferenceSchema(StrictSchema):
    kind: Literal["piecewise"]
    points: List[Tuple[float, List[float]]] = Field(min_length=1)


class ScenarioConfig(StrictSchema):
    horizon: float = Field(gt=0)
    x0: Optional[List[float]] = None
    reference: Union[ConstantReferenceSchema, SinusoidReferenceSchema, PiecewiseReferenceSchema] = Field(
        discriminator="kind"
    )
    faults: List[FaultPhaseSchema] = Field(min_length=1)


def _load(path: Union[str, Path], schema):
    path = Path(path)
    text = path.read_text()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"{path}: not valid JSON ({e})")
    try:
        return schema.model_validate(data)
    except ValidationError as e:
        raise ConfigurationError(f"{path}: {e}")


def load_problem_config(path: Union[str, Path]) -> ProblemConfig:
    """Read and validate a problem file"""
    return _load(path, ProblemConfig)


def load_scenario_config(path: Union[str, Path]) -> ScenarioConfig:
    """Read and validate a scenario file"""
    return _load(path, ScenarioConfig)
