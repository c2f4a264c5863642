from .problem import (
    MatrixVariable,
    AffineTerm,
    AffineExpr,
    LmiConstraint,
    SdpOutcome,
    SdpStatus,
    SdpProblem
)
from .client import SdpSolverClient, sdp_solver

__all__ = [
    'MatrixVariable',
    'AffineTerm',
    'AffineExpr',
    'LmiConstraint',
    'SdpOutcome',
    'SdpStatus',
    'SdpProblem',
    'SdpSolverClient',
    'sdp_solver'
]
