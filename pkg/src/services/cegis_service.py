"""
Counterexample-guided synthesis loop: alternate the learner SDP and the global verifier
until a certificate, certified infeasibility, or the iteration budget.
"""

import logging
import time
from typing import List, Optional, Tuple

import numpy as np

from models.errors import ExtractionError, InfeasibleError, SolverFailure, StallError, UndecidedError
from models.synthesis_models import CegisConfig, CegisOutcome, IterationRecord, OutcomeKind, SampleSet
from models.system_models import FaultSet, InputBox, JacobianPair, LipschitzBounds, NonlinearModel, StatePolytope
from models.verifier_models import Certificate
from services.dynamics_service import linearize
from services.learner_service import add_sample, extract_controller, learn
from services.verifier_service import VerifierService, verifier_service
from solver.client import SdpSolverClient, sdp_solver
from utils.formatting import format_duration, format_number, format_vector
from utils.ldi import enumerate_sign_matrices

logger = logging.getLogger(__name__)

# Consecutive rejected counterexamples tolerated before the loop is declared stalled
STALL_LIMIT = 2


def default_initial_sample(model: NonlinearModel, fault_set: FaultSet) -> JacobianPair:
    """Linearization at the nominal origin"""
    return linearize(model, np.zeros(model.n), np.ones(fault_set.p))


def check_separation(sample_set: SampleSet, separation: float, slack: float = 1e-9) -> List[Tuple[int, int, float]]:
    """Pairs (earlier, later, distance) of samples added by the verifier that sit closer than the separation"""
    violations = []
    for later in range(1, len(sample_set)):
        for earlier in range(later):
            distance = sample_set.pairs[later].distance(sample_set.pairs[earlier])
            if distance <= separation - slack:
                violations.append((earlier, later, distance))
    return violations


class CegisService:
    """Service running the learner / verifier loop"""

    def __init__(self, verifier: VerifierService = verifier_service, solver: SdpSolverClient = sdp_solver,
                 final_check: bool = True):
        self.verifier = verifier
        self.solver = solver
        self.final_check = final_check

    async def run(
        self,
        model: NonlinearModel,
        polytope: StatePolytope,
        box: InputBox,
        fault_set: FaultSet,
        config: CegisConfig,
        lipschitz: LipschitzBounds,
        initial_sample: Optional[Tuple[np.ndarray, np.ndarray]] = None,
        fixed_gain: Optional[np.ndarray] = None
    ) -> CegisOutcome:
        """
        Run the synthesis loop

        Args:
            model: Control-affine model
            polytope: State domain
            box: Saturation thresholds
            fault_set: Single-actuator fault set
            config: Loop hyperparameters
            lipschitz: Jacobian Lipschitz bounds used by the verifier
            initial_sample: Optional (x, phi) replacing the nominal origin seed
            fixed_gain: Optional gain K; the learner then only shapes the ellipsoid

        Returns:
            CegisOutcome with the full iteration history

        Raises:
            StallError: the verifier returned already-stored samples twice in a row
            SolverFailure: the learner backend broke down
            ExtractionError: the certified Q could not be inverted

            Each carries the partial outcome in its outcome attribute.
        """
        signs = enumerate_sign_matrices(model.p)
        samples = SampleSet()
        if initial_sample is None:
            first = default_initial_sample(model, fault_set)
        else:
            first = linearize(model, np.asarray(initial_sample[0], dtype=float), np.asarray(initial_sample[1], dtype=float))
        add_sample(samples, first, 0)

        history: List[IterationRecord] = []
        rejected = 0
        iteration = 0
        mode = "fixed-gain" if fixed_gain is not None else "synthesis"
        logger.info(
            f"Starting {mode} loop on {model.name}: eta={config.eta}, epsilon={config.epsilon}, tau={config.tau}, "
            f"Lipschitz {lipschitz.provenance} (kappa_A={format_number(lipschitz.kappa_A)}, "
            f"kappa_B={format_number(lipschitz.kappa_B)})"
        )

        try:
            for iteration in range(1, config.max_iterations + 1):
                start_time = time.perf_counter()
                try:
                    solution = learn(samples, config, polytope, box, signs, iteration, fixed_gain, self.solver)
                except InfeasibleError as e:
                    history.append(IterationRecord(iteration, len(samples), duration=time.perf_counter() - start_time))
                    logger.info(f"Iteration {iteration}: learner infeasible with {len(samples)} samples")
                    return CegisOutcome(OutcomeKind.INFEASIBLE, iteration, history, samples, message=str(e))

                try:
                    result = await self.verifier.verify(solution, model, polytope, fault_set, config, lipschitz, signs)
                except UndecidedError as e:
                    elapsed = time.perf_counter() - start_time
                    history.append(IterationRecord(iteration, len(samples), solution.objective, duration=elapsed))
                    logger.warning(f"Iteration {iteration}: verifier undecided ({str(e)})")
                    return CegisOutcome(OutcomeKind.UNDECIDED, iteration, history, samples, gap=e.gap, message=str(e))

                elapsed = time.perf_counter() - start_time
                if isinstance(result, Certificate):
                    history.append(IterationRecord(iteration, len(samples), solution.objective, result.lambda_star,
                                                   duration=elapsed))
                    logger.info(
                        f"Iteration {iteration}: certificate, lambda*={format_number(result.lambda_star)}, "
                        f"bound={format_number(result.certified_bound)} ({format_duration(elapsed)})"
                    )
                    return await self._converged(iteration, history, samples, solution, result, model, polytope,
                                                 box, fault_set, config, lipschitz, signs)

                history.append(IterationRecord(iteration, len(samples), solution.objective,
                                               counterexample=result.summary(), duration=elapsed))
                logger.info(
                    f"Iteration {iteration}: trace(Q)={format_number(solution.objective)}, counterexample "
                    f"lambda={format_number(result.lambda_value)} at x={format_vector(result.x)}, "
                    f"phi={format_vector(result.phi, 2)} ({format_duration(elapsed)})"
                )

                nearest = samples.min_distance(result.pair)
                if nearest <= config.separation - 1e-9:
                    logger.warning(
                        f"Counterexample at distance {nearest:.3e} from the sample set, "
                        f"below the separation {config.separation:.3e}"
                    )
                if add_sample(samples, result.pair, iteration):
                    rejected = 0
                else:
                    rejected += 1
                    if rejected >= STALL_LIMIT:
                        raise StallError(
                            f"verifier returned stored samples {rejected} times in a row at iteration {iteration}; "
                            "the loop cannot make progress"
                        )
        except (StallError, SolverFailure, ExtractionError) as e:
            # partial record for the run report
            e.outcome = CegisOutcome(OutcomeKind.UNDECIDED, iteration, history, samples,
                                     message=f"{e.stage} failure: {e}")
            raise

        logger.warning(f"Iteration budget of {config.max_iterations} exhausted without a certificate")
        return CegisOutcome(OutcomeKind.BUDGET, config.max_iterations, history, samples,
                            message=f"no certificate within {config.max_iterations} iterations")

    async def _converged(self, iteration, history, samples, solution, certificate, model, polytope, box,
                         fault_set, config, lipschitz, signs) -> CegisOutcome:
        controller = extract_controller(solution, box)
        controller.certificate = {
            "lambda_star": certificate.lambda_star,
            "certified_bound": certificate.certified_bound,
            "provenance": certificate.provenance,
            "iterations": iteration,
        }
        for earlier, later, distance in check_separation(samples, config.separation):
            logger.warning(f"Samples {earlier} and {later} are only {distance:.3e} apart")

        if self.final_check:
            try:
                recheck = await self.verifier.verify(controller.as_solution(), model, polytope, fault_set,
                                                     config, lipschitz, signs)
            except UndecidedError as e:
                return CegisOutcome(OutcomeKind.UNDECIDED, iteration, history, samples, gap=e.gap,
                                    message=f"final re-verification undecided: {str(e)}")
            if not isinstance(recheck, Certificate):
                return CegisOutcome(OutcomeKind.UNDECIDED, iteration, history, samples, gap=recheck.lambda_value,
                                    message="extracted controller failed re-verification")
            controller.certificate["recheck_bound"] = recheck.certified_bound

        return CegisOutcome(OutcomeKind.CONVERGED, iteration, history, samples, controller, certificate)


# Create a singleton instance
cegis_service = CegisService()
