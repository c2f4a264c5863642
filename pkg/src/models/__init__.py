# Export all models for easy imports
from .base_model import BaseModel
from .errors import (
    FtcError,
    ConfigurationError,
    EvaluationError,
    DivergenceError,
    AssemblyError,
    ContractViolation,
    SolverFailure,
    ExtractionError,
    InfeasibleError,
    UndecidedError,
    StallError
)
from .system_models import NonlinearModel, FaultSet, StatePolytope, InputBox, JacobianPair, LipschitzBounds
from .ldi_models import SignMatrixSet
from .synthesis_models import (
    VerifierSettings,
    CegisConfig,
    SampleSet,
    LearnerSolution,
    Controller,
    OutcomeKind,
    IterationRecord,
    CegisOutcome
)
from .verifier_models import VerifierProblem, SearchResult, Certificate, Counterexample
from .simulation_models import (
    FaultPhase,
    FaultSchedule,
    ReferenceSignal,
    ConstantReference,
    SinusoidReference,
    PiecewiseReference,
    Trace
)
from .vehicle_models import Thruster, AuvParams

__all__ = [
    'BaseModel',
    'FtcError',
    'ConfigurationError',
    'EvaluationError',
    'DivergenceError',
    'AssemblyError',
    'ContractViolation',
    'SolverFailure',
    'ExtractionError',
    'InfeasibleError',
    'UndecidedError',
    'StallError',
    'NonlinearModel',
    'FaultSet',
    'StatePolytope',
    'InputBox',
    'JacobianPair',
    'LipschitzBounds',
    'SignMatrixSet',
    'VerifierSettings',
    'CegisConfig',
    'SampleSet',
    'LearnerSolution',
    'Controller',
    'OutcomeKind',
    'IterationRecord',
    'CegisOutcome',
    'VerifierProblem',
    'SearchResult',
    'Certificate',
    'Counterexample',
    'FaultPhase',
    'FaultSchedule',
    'ReferenceSignal',
    'ConstantReference',
    'SinusoidReference',
    'PiecewiseReference',
    'Trace',
    'Thruster',
    'AuvParams'
]
