"""
Turn validated problem and scenario files into the objects the synthesis and simulation services consume.
"""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from benchmarks import (
    analytic_kappa_auv2,
    analytic_kappa_b,
    analytic_kappas_linear,
    auv2,
    auv5,
    discrete_linear_test,
    linear_test,
)
from config.problem import ProblemConfig, ScenarioConfig
from config.settings import FTC_THREADS
from models.errors import ConfigurationError
from models.simulation_models import (
    ConstantReference,
    FaultPhase,
    FaultSchedule,
    PiecewiseReference,
    ReferenceSignal,
    SinusoidReference,
)
from models.synthesis_models import CegisConfig, VerifierSettings
from models.system_models import FaultSet, InputBox, LipschitzBounds, NonlinearModel, StatePolytope
from models.vehicle_models import AuvParams, Thruster
from services.dynamics_service import resolve_lipschitz

logger = logging.getLogger(__name__)


class ProblemSetup:
    """Everything a synthesis, verification or ROA run needs, built from one problem file"""

    def __init__(
        self,
        model: NonlinearModel,
        polytope: StatePolytope,
        box: InputBox,
        fault_set: FaultSet,
        config: CegisConfig,
        source: ProblemConfig,
        params: Optional[AuvParams] = None
    ):
        self.model = model
        self.polytope = polytope
        self.box = box
        self.fault_set = fault_set
        self.config = config
        self.source = source
        self.params = params
        self._lipschitz: Optional[LipschitzBounds] = None

    @property
    def seed(self) -> int:
        return self.source.seed

    @property
    def initial_sample(self) -> Optional[Tuple[np.ndarray, np.ndarray]]:
        sample = self.source.initial_sample
        if sample is None:
            return None
        return np.asarray(sample.x, dtype=float), np.asarray(sample.phi, dtype=float)

    def echo(self) -> Dict[str, Any]:
        """The problem file as parsed, defaults filled in"""
        return self.source.model_dump(mode="json")

    def lipschitz(self) -> LipschitzBounds:
        """Jacobian Lipschitz bounds, resolved once per setup"""
        if self._lipschitz is None:
            self._lipschitz = self._resolve_lipschitz()
        return self._lipschitz

    def _resolve_lipschitz(self) -> LipschitzBounds:
        settings = self.source.lipschitz
        dt = self.model.dt
        if settings.analytic:
            if self.source.model == "auv2":
                kappa_A, kappa_B = analytic_kappa_auv2(self.params, dt), analytic_kappa_b(self.params, dt)
            elif self.source.model == "linear-test" and not self.source.linear.discrete:
                kappa_A, kappa_B = analytic_kappas_linear(self.source.linear.B, dt)
            elif self.source.model == "linear-test":
                kappa_A, kappa_B = analytic_kappas_linear(np.asarray(self.source.linear.B) / dt, dt)
            else:
                raise ConfigurationError(f"no closed-form Lipschitz constants for {self.source.model}")
            logger.info(f"Closed-form Lipschitz constants for {self.model.name}: kappa_A={kappa_A}, kappa_B={kappa_B}")
            # both models have a state-independent input matrix
            return LipschitzBounds(kappa_A, kappa_B, certified=True, kappa_B_state=0.0)
        return resolve_lipschitz(
            self.model,
            self.polytope,
            self.fault_set,
            settings.kappa_A,
            settings.kappa_B,
            settings.samples,
            settings.safety_factor,
            self.seed
        )


def _build_model(problem: ProblemConfig) -> Tuple[NonlinearModel, Optional[AuvParams]]:
    dt = problem.hyperparameters.dt
    if problem.model == "linear-test":
        if problem.linear.discrete:
            return discrete_linear_test(problem.linear.A, problem.linear.B, dt), None
        return linear_test(problem.linear.A, problem.linear.B, dt), None

    raw = problem.params
    params = AuvParams(
        m=raw.m,
        J_z=raw.J_z,
        X_u=raw.X_u,
        X_uu=raw.X_uu,
        N_r=raw.N_r,
        N_rr=raw.N_rr,
        Y_v=raw.Y_v,
        Y_vv=raw.Y_vv,
        thrusters=[Thruster(np.deg2rad(t.alpha_deg), t.lx, t.ly) for t in raw.thrusters],
        u_max=problem.u_max,
    )
    builder = auv2 if problem.model == "auv2" else auv5
    return builder(params, dt), params


def _build_polytope(problem: ProblemConfig) -> StatePolytope:
    domain = problem.domain
    if domain.box is not None:
        return StatePolytope.from_box(domain.box.lower, domain.box.upper)
    if domain.bounding_box is not None:
        return StatePolytope(domain.rows, domain.bounding_box.lower, domain.bounding_box.upper)
    return StatePolytope(domain.rows)


def build_setup(problem: ProblemConfig, threads: Optional[int] = None) -> ProblemSetup:
    """
    Build the model, domains and loop configuration of a problem file

    Args:
        problem: Validated problem configuration
        threads: Verifier worker cap from the command line (settings default otherwise)

    Returns:
        ProblemSetup; Lipschitz bounds are resolved on first use

    Raises:
        ConfigurationError: the description is inconsistent
    """
    model, params = _build_model(problem)
    polytope = _build_polytope(problem)
    box = InputBox(problem.u_max)
    fault_set = FaultSet(model.p)

    hyper = problem.hyperparameters
    verifier = problem.verifier
    settings = VerifierSettings(
        diam_tol_rel=verifier.diam_tol_rel,
        max_evaluations=verifier.max_evaluations,
        batch_size=verifier.batch_size,
        lipschitz_scale=verifier.lipschitz_scale,
        threads=threads if threads is not None else FTC_THREADS
    )
    config = CegisConfig(
        eta=hyper.eta,
        epsilon=hyper.epsilon,
        tau=hyper.tau,
        max_iterations=hyper.max_iterations,
        dt=hyper.dt,
        solver_tol=hyper.solver_tol,
        prune_interior_samples=problem.learner.prune_interior_samples,
        verifier=settings,
    )
    logger.info(f"Problem {model.name}: n={model.n}, p={model.p}, {polytope.rows} domain rows, u_max={problem.u_max}")
    return ProblemSetup(model, polytope, box, fault_set, config, problem, params)


def _build_reference(scenario: ScenarioConfig) -> ReferenceSignal:
    reference = scenario.reference
    if reference.kind == "constant":
        return ConstantReference(reference.x_ref)
    if reference.kind == "sinusoid":
        return SinusoidReference(reference.amplitude, reference.frequency, reference.offset)
    return PiecewiseReference(reference.points)


def build_scenario(
    scenario: ScenarioConfig,
    p: int,
    n: int
) -> Tuple[FaultSchedule, ReferenceSignal, float, Optional[np.ndarray]]:
    """
    Build the fault schedule, reference, horizon and initial state of a scenario

    Raises:
        ConfigurationError: dimensions disagree with the model or the schedule is not admissible
    """
    schedule = FaultSchedule([FaultPhase(phase.t_start, phase.t_end, phase.phi) for phase in scenario.faults])
    schedule.validate(p, scenario.horizon)
    reference = _build_reference(scenario)
    if reference.n != n:
        raise ConfigurationError(f"reference has {reference.n} channels, the model has {n} states")
    x0 = None
    if scenario.x0 is not None:
        x0 = np.asarray(scenario.x0, dtype=float)
        if x0.shape != (n,):
            raise ConfigurationError(f"x0 needs {n} entries, got {x0.size}")
    return schedule, reference, scenario.horizon, x0
