"""
Exception hierarchy shared by every stage of the toolkit.

Each error names the stage it belongs to so the command handlers can report
where a run failed and pick the matching exit code.
"""

from typing import Optional


class FtcError(Exception):
    """Base class for all toolkit errors"""

    stage = "run"
    # CegisOutcome recorded up to the failure, when the synthesis loop raised it
    outcome = None


class ConfigurationError(FtcError):
    """Invalid problem, scenario or hyperparameter configuration"""

    stage = "config"


class EvaluationError(FtcError):
    """A model evaluator produced a non-finite value"""

    stage = "model"


class DivergenceError(FtcError):
    """Simulation state left the finite range"""

    stage = "simulation"

    def __init__(self, message: str, time_index: int):
        super().__init__(f"{message} (time index {time_index})")
        self.time_index = time_index


class AssemblyError(FtcError):
    """Matrix blocks with inconsistent dimensions"""

    stage = "assembly"


class ContractViolation(FtcError):
    """A caller broke an operation's precondition"""

    stage = "contract"


class SolverFailure(FtcError):
    """The SDP backend broke down numerically (not a proof of infeasibility)"""

    stage = "learner"


class ExtractionError(FtcError):
    """Controller matrices could not be recovered from the learner solution"""

    stage = "learner"


class InfeasibleError(FtcError):
    """The learner SDP is certified infeasible"""

    stage = "learner"

    def __init__(self, message: str, iteration: Optional[int] = None):
        super().__init__(message)
        self.iteration = iteration


class UndecidedError(FtcError):
    """The verifier could not separate the bound from zero within its budget"""

    stage = "verifier"

    def __init__(self, message: str, gap: float, subproblem: Optional[int] = None):
        super().__init__(message)
        self.gap = gap
        self.subproblem = subproblem


class StallError(FtcError):
    """The verifier kept returning counterexamples already in the sample set"""

    stage = "cegis"
