"""
Map failures to the command-line exit-code contract.

0 success, 1 usage / IO / configuration, 2 infeasible or counterexample,
3 budget exhausted, verifier undecided or solver breakdown, 4 simulation divergence.
"""

import logging
import traceback

from models.errors import (
    DivergenceError,
    ExtractionError,
    FtcError,
    InfeasibleError,
    SolverFailure,
    StallError,
    UndecidedError,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_INFEASIBLE = 2
EXIT_UNDECIDED = 3
EXIT_DIVERGED = 4


def exit_code_for(error: BaseException) -> int:
    """Exit code of an exception raised while running a command"""
    if isinstance(error, InfeasibleError):
        return EXIT_INFEASIBLE
    # A numerical breakdown proves nothing, so it is reported like an undecided run
    if isinstance(error, (UndecidedError, StallError, SolverFailure, ExtractionError)):
        return EXIT_UNDECIDED
    if isinstance(error, DivergenceError):
        return EXIT_DIVERGED
    # ConfigurationError, ContractViolation, AssemblyError, EvaluationError, OSError
    return EXIT_USAGE


def handle_error(command: str, error: BaseException) -> int:
    """Log a failed command and return its exit code"""
    # Full traceback only on --verbose
    tb_string = "".join(traceback.format_exception(type(error), error, error.__traceback__))
    logger.debug(f"Traceback of the failed {command} command:\n{tb_string}")

    if isinstance(error, FtcError):
        stage = error.stage
    elif isinstance(error, OSError):
        stage = "io"
    else:
        stage = "internal"

    if isinstance(error, UndecidedError):
        handle_undecided_error(command, error)
    elif isinstance(error, OSError):
        logger.error(f"{command} failed at stage {stage}: {error.strerror or error} ({error.filename})")
    else:
        logger.error(f"{command} failed at stage {stage}: {error}")

    return exit_code_for(error)


def handle_undecided_error(command: str, error: UndecidedError) -> None:
    where = f" in fault subproblem {error.subproblem + 1}" if error.subproblem is not None else ""
    logger.error(f"{command} failed at stage verifier: undecided{where}, gap {error.gap:.3e} ({error})")
