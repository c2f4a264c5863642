"""
Handlers for the synth, verify, simulate and roa commands.

Every handler returns the process exit code; failures are routed through
handle_error so the code always follows the documented contract.
"""

import logging
from pathlib import Path
from typing import Optional

import numpy as np

from config.problem import load_problem_config, load_scenario_config
from models.errors import ConfigurationError, ExtractionError, FtcError, SolverFailure, StallError
from models.synthesis_models import Controller, OutcomeKind, SampleSet
from models.verifier_models import Certificate
from services.cegis_service import cegis_service, default_initial_sample
from services.dynamics_service import linearize
from services.learner_service import add_sample, assemble_learner_sdp, roa_for_fixed_gain
from services.setup_service import ProblemSetup, build_scenario, build_setup
from services.simulation_service import metrics, simulate
from services.verifier_service import verifier_service
from storage import (
    load_controller,
    save_controller,
    save_metrics,
    save_roa,
    save_run_report,
    save_trace,
    sibling,
    write_json,
)
from utils.formatting import format_matrix, format_number, format_vector
from utils.ldi import enumerate_sign_matrices
from .error_handlers import EXIT_INFEASIBLE, EXIT_OK, EXIT_UNDECIDED, handle_error

logger = logging.getLogger(__name__)

OUTCOME_EXIT_CODES = {
    OutcomeKind.CONVERGED: EXIT_OK,
    OutcomeKind.INFEASIBLE: EXIT_INFEASIBLE,
    OutcomeKind.BUDGET: EXIT_UNDECIDED,
    OutcomeKind.UNDECIDED: EXIT_UNDECIDED,
}


def _load_setup(config_path: str, threads: Optional[int] = None) -> ProblemSetup:
    return build_setup(load_problem_config(config_path), threads)


def _check_controller(controller: Controller, setup: ProblemSetup, path: str) -> None:
    model = setup.model
    if controller.K.shape != (model.p, model.n):
        raise ConfigurationError(
            f"{path}: gain is {controller.K.shape[0]}x{controller.K.shape[1]}, "
            f"model {model.name} needs {model.p}x{model.n}"
        )
    if not np.allclose(controller.u_max, setup.box.u_max):
        logger.warning(
            f"Controller saturation {format_vector(controller.u_max)} differs from the problem's "
            f"{format_vector(setup.box.u_max)}; using the problem's"
        )
        controller.u_max = setup.box.u_max.copy()


def _dump_first_sdp(setup: ProblemSetup, path: str) -> None:
    samples = SampleSet()
    initial = setup.initial_sample
    if initial is None:
        add_sample(samples, default_initial_sample(setup.model, setup.fault_set))
    else:
        add_sample(samples, linearize(setup.model, *initial))
    problem = assemble_learner_sdp(samples, setup.config, setup.polytope, setup.box,
                                   enumerate_sign_matrices(setup.model.p))
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    with target.open("w") as stream:
        problem.dump_triplets(stream)
    logger.info(f"First learner SDP written to {path} ({len(problem.constraints)} LMIs)")


async def cmd_synth(
    config_path: str,
    out_path: str,
    threads: Optional[int] = None,
    dump_sdp: Optional[str] = None
) -> int:
    """
    Synthesize a certified controller

    Writes the controller to out_path (on convergence) and a run report next to it,
    also when the loop stops on a stall or a solver breakdown.

    Returns:
        0 converged, 2 infeasible, 3 budget, undecided or solver breakdown, 1 on configuration or IO errors
    """
    try:
        setup = _load_setup(config_path, threads)
        lipschitz = setup.lipschitz()
        if dump_sdp:
            _dump_first_sdp(setup, dump_sdp)

        try:
            outcome = await cegis_service.run(
                setup.model,
                setup.polytope,
                setup.box,
                setup.fault_set,
                setup.config,
                lipschitz,
                initial_sample=setup.initial_sample
            )
        except (StallError, SolverFailure, ExtractionError) as e:
            if e.outcome is not None:
                save_run_report(sibling(out_path, "report.json"), e.outcome, setup.config, setup.echo(), lipschitz)
            raise
        save_run_report(sibling(out_path, "report.json"), outcome, setup.config, setup.echo(), lipschitz)

        if outcome.converged:
            save_controller(out_path, outcome.controller, setup.config, setup.echo(), outcome.samples,
                            dict(lipschitz.to_dict(), provenance=lipschitz.provenance))
            logger.info(
                f"Converged after {outcome.iterations} iterations: lambda*="
                f"{format_number(outcome.certificate.lambda_star)}, trace(Q)="
                f"{format_number(float(np.trace(outcome.controller.Q)))}\nK =\n{format_matrix(outcome.controller.K)}"
            )
        else:
            logger.error(f"synth ended {outcome.kind.value} after {outcome.iterations} iterations: {outcome.message}")
        return OUTCOME_EXIT_CODES[outcome.kind]
    except (FtcError, OSError) as e:
        return handle_error("synth", e)


async def cmd_verify(
    config_path: str,
    controller_path: str,
    out_path: Optional[str] = None,
    threads: Optional[int] = None
) -> int:
    """
    Re-run the verifier on a stored controller

    Returns:
        0 certificate, 2 counterexample, 3 undecided, 1 on configuration or IO errors
    """
    try:
        setup = _load_setup(config_path, threads)
        controller, _ = load_controller(controller_path)
        _check_controller(controller, setup, controller_path)
        if not np.all(np.isfinite(controller.Q)):
            raise ConfigurationError(f"{controller_path}: controller has no ellipsoid Q to verify")

        lipschitz = setup.lipschitz()
        result = await verifier_service.verify(controller.as_solution(), setup.model, setup.polytope,
                                               setup.fault_set, setup.config, lipschitz)
        if out_path:
            write_json(out_path, {
                "kind": "verification",
                "result": result.to_dict() if isinstance(result, Certificate) else result.summary(),
                "lipschitz": dict(lipschitz.to_dict(), provenance=lipschitz.provenance),
                "problem": setup.echo(),
            })

        if isinstance(result, Certificate):
            logger.info(
                f"Certificate: lambda*={format_number(result.lambda_star)}, certified bound "
                f"{format_number(result.certified_bound)} ({result.provenance})"
            )
            return EXIT_OK
        logger.error(
            f"Counterexample: lambda={format_number(result.lambda_value)} at x={format_vector(result.x)}, "
            f"phi={format_vector(result.phi, 2)} (fault subproblem {result.subproblem + 1}, sign pattern {result.j})"
        )
        return EXIT_INFEASIBLE
    except (FtcError, OSError) as e:
        return handle_error("verify", e)


async def cmd_simulate(config_path: str, controller_path: str, scenario_path: str, out_csv: str) -> int:
    """
    Simulate a stored controller on a scenario

    Writes the trace CSV and a metrics JSON next to it.

    Returns:
        0 on success, 4 on divergence, 1 on configuration or IO errors
    """
    try:
        setup = _load_setup(config_path)
        controller, _ = load_controller(controller_path)
        _check_controller(controller, setup, controller_path)
        scenario = load_scenario_config(scenario_path)
        schedule, reference, horizon, x0 = build_scenario(scenario, setup.model.p, setup.model.n)

        trace = simulate(setup.model, controller, schedule, reference, horizon, x0)
        report = metrics(trace, setup.box.u_max)

        scenario_echo = scenario.model_dump(mode="json")
        save_trace(out_csv, trace, setup.echo(), scenario_echo)
        save_metrics(sibling(out_csv, "metrics.json"), report, setup.echo(), scenario_echo)
        for phase in report["phases"]:
            logger.info(
                f"Phase {phase['phase'] + 1} ({phase['t_start']:g}-{phase['t_end']:g} s, phi="
                f"{format_vector(phase['phi'], 2)}): error {format_number(phase['initial_error'])} -> "
                f"{format_number(phase['final_error'])}, max {format_number(phase['max_error'])}"
            )
        return EXIT_OK
    except (FtcError, OSError) as e:
        return handle_error("simulate", e)


async def cmd_roa(
    config_path: str,
    controller_path: str,
    out_path: str,
    threads: Optional[int] = None,
    compare_scale: Optional[float] = None
) -> int:
    """
    Largest certified invariant ellipsoid for a stored gain

    With compare_scale, the same computation runs for the gain scaled by that
    factor and the result is stored alongside for comparison.

    Returns:
        0 on success, 2 when no ellipsoid exists for the gain, 3 when undecided, 1 on configuration or IO errors
    """
    try:
        setup = _load_setup(config_path, threads)
        controller, _ = load_controller(controller_path)
        _check_controller(controller, setup, controller_path)
        lipschitz = setup.lipschitz()

        Q = await roa_for_fixed_gain(controller.K, setup.model, setup.polytope, setup.box, setup.fault_set,
                                     setup.config, lipschitz)
        logger.info(f"Certified region of attraction: trace(Q) = {format_number(float(np.trace(Q)))}")

        comparison = None
        if compare_scale is not None:
            scaled = compare_scale * controller.K
            try:
                Q_scaled = await roa_for_fixed_gain(scaled, setup.model, setup.polytope, setup.box,
                                                    setup.fault_set, setup.config, lipschitz)
                comparison = {"scale": compare_scale, "K": scaled, "Q": Q_scaled,
                              "trace_Q": float(np.trace(Q_scaled))}
                logger.info(f"Gain scaled by {compare_scale}: trace(Q) = {format_number(comparison['trace_Q'])}")
            except FtcError as e:
                logger.warning(f"No region of attraction for the gain scaled by {compare_scale}: {e}")
                comparison = {"scale": compare_scale, "K": scaled, "error": str(e)}

        save_roa(out_path, controller.K, Q, setup.echo(), comparison)
        return EXIT_OK
    except (FtcError, OSError) as e:
        return handle_error("roa", e)
