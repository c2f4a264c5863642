"""
Verifier: certifies a learner candidate over every state of the domain and every single-actuator
fault, or returns the worst counterexample found.

Each fault subproblem is a box search over (active state coordinates, phi_i). The objective is
the smallest eigenvalue of the certificate matrix over all sign patterns; its Lipschitz constant
comes from the Jacobian Lipschitz bounds, so every region gets a rigorous lower bound
f(center) - L_x ||h_x|| - L_phi |h_phi|. Regions are trisected along their widest weighted edge.
"""

import asyncio
import heapq
import json
import logging
import time
from concurrent.futures import ThreadPoolExecutor
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np

from models.errors import ContractViolation, UndecidedError
from models.ldi_models import SignMatrixSet
from models.synthesis_models import CegisConfig, LearnerSolution, VerifierSettings
from models.system_models import FaultSet, LipschitzBounds, NonlinearModel, StatePolytope
from models.verifier_models import Certificate, Counterexample, SearchResult, VerifierProblem
from services.dynamics_service import jacobians, linearize
from utils.ldi import enumerate_sign_matrices, operator_norm, reduced_xi_stack

logger = logging.getLogger(__name__)

# Progress records are emitted every this many refinement rounds
PROGRESS_EVERY = 50

Evaluator = Callable[[np.ndarray], Tuple[np.ndarray, np.ndarray]]
Group = Tuple[Sequence[int], float]


def lipschitz_constants(
    candidate: LearnerSolution,
    signs: SignMatrixSet,
    lipschitz: LipschitzBounds,
    eta: float,
    scale: str = "eta"
) -> Tuple[float, float]:
    """
    Objective Lipschitz constants for state and fault coordinates

    With scale "eta": L_x = eta (kappa_A + kappa_B), L_phi = eta kappa_B.
    With scale "candidate": eta is replaced by ||Q|| on the A-term and by
    max_j ||E_j Y + E_j^- Z|| on the B-terms, and the state constant uses the
    state-only bound of B when one is known.
    """
    if scale == "eta":
        return eta * (lipschitz.kappa_A + lipschitz.kappa_B), eta * lipschitz.kappa_B
    if scale != "candidate":
        raise ContractViolation(f"unknown Lipschitz scale {scale!r}")
    q_scale = operator_norm(candidate.Q)
    w_scale = max(operator_norm(w) for w in signs.mixed_gains(candidate.Y, candidate.Z))
    return q_scale * lipschitz.kappa_A + w_scale * lipschitz.state_kappa_B, w_scale * lipschitz.kappa_B


def build_verifier_problem(
    candidate: LearnerSolution,
    model: NonlinearModel,
    polytope: StatePolytope,
    fault_set: FaultSet,
    config: CegisConfig,
    lipschitz: LipschitzBounds,
    signs: Optional[SignMatrixSet] = None
) -> VerifierProblem:
    signs = signs or enumerate_sign_matrices(model.p)
    l_state, l_fault = lipschitz_constants(candidate, signs, lipschitz, config.eta, config.verifier.lipschitz_scale)
    if not (np.isfinite(l_state) and np.isfinite(l_fault)):
        raise ContractViolation("verifier Lipschitz constants must be finite")
    return VerifierProblem(candidate, model, polytope, fault_set, signs, lipschitz,
                           l_state, l_fault, config.tau, config.verifier)


def evaluate_points(
    problem: VerifierProblem,
    states: np.ndarray,
    phis: np.ndarray,
    subproblem: int
) -> Tuple[np.ndarray, np.ndarray]:
    """
    Objective at a batch of full states and fault efficiencies

    Returns:
        Tuple of (values, j indices); ties in j resolve to the lowest index
    """
    model = problem.model
    count = len(states)
    A = np.empty((count, model.n, model.n))
    B = np.empty((count, model.n, model.p))
    for k in range(count):
        A[k], B[k] = jacobians(model, states[k], problem.fault_set.fault_vector(subproblem, float(phis[k])))

    Q = problem.candidate.Q
    M = A[:, None] @ Q + B[:, None] @ problem.mixed_gains[None]
    smallest = np.linalg.eigvalsh(reduced_xi_stack(Q, M, problem.tau))[..., 0]
    values = np.minimum(smallest, 1.0 - problem.tau)
    js = np.argmin(values, axis=1)
    return values[np.arange(count), js], js


def objective(problem: VerifierProblem, x: np.ndarray, phi_i: float, subproblem: int) -> Tuple[float, int]:
    """min over sign patterns j of min_eig(certificate matrix) at (x, phi)"""
    values, js = evaluate_points(problem, np.asarray(x, dtype=float)[None], np.array([phi_i]), subproblem)
    return float(values[0]), int(js[0])


def lipschitz_minimize(
    evaluate: Evaluator,
    lower: np.ndarray,
    upper: np.ndarray,
    groups: List[Group],
    settings: VerifierSettings,
    label: str = "search"
) -> Tuple[float, np.ndarray, int, float, int, int]:
    """
    Deterministic Lipschitz branch-and-bound on a box

    Stops as soon as a point with value <= 0 is found or every region's lower
    bound is positive.

    Args:
        evaluate: Batch objective, points (N, d) -> (values, tags)
        lower: Box lower corner
        upper: Box upper corner
        groups: (coordinate indices, Lipschitz constant) pairs; the cone radius of a
            region is the sum over groups of L * ||half-widths of the group||_2
        settings: Tolerances and budget
        label: Name used in progress records

    Returns:
        Tuple of (best value, best point, its tag, certified lower bound, evaluations, open regions)

    Raises:
        UndecidedError: budget exhausted, or only sub-tolerance regions remain undecided
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    if np.any(upper <= lower):
        raise ContractViolation(f"{label}: search box is degenerate")
    axis_weight = np.zeros(lower.size)
    for indices, constant in groups:
        if not (constant >= 0.0 and np.isfinite(constant)):
            raise ContractViolation(f"{label}: Lipschitz constant must be finite and nonnegative, got {constant}")
        axis_weight[list(indices)] = constant

    def radius(half: np.ndarray) -> np.ndarray:
        return sum(constant * np.linalg.norm(half[..., list(indices)], axis=-1) for indices, constant in groups)

    diam_tol = settings.diam_tol_rel * float(np.linalg.norm(upper - lower))
    center = 0.5 * (lower + upper)
    half = 0.5 * (upper - lower)
    values, tags = evaluate(center[None])
    evaluations = 1
    best_value, best_point, best_tag = float(values[0]), center, int(tags[0])

    heap = [(best_value - float(radius(half)), 0, center, half, best_value)]
    counter = 1
    stalled = []
    rounds = 0
    started = time.perf_counter()

    while heap and best_value > 0.0 and heap[0][0] <= 0.0:
        if evaluations >= settings.max_evaluations:
            gap = min([heap[0][0]] + [entry[0] for entry in stalled])
            raise UndecidedError(
                f"{label}: evaluation budget of {settings.max_evaluations} exhausted with bound {gap:.3e}; "
                "raise epsilon or supply analytic Lipschitz constants",
                gap
            )

        batch = []
        while heap and heap[0][0] <= 0.0 and 2 * (len(batch) + 1) <= max(2, settings.batch_size):
            entry = heapq.heappop(heap)
            if 2.0 * float(np.linalg.norm(entry[3])) < diam_tol:
                stalled.append(entry)
                continue
            batch.append(entry)
        if not batch:
            continue

        centers = []
        children = []
        for bound, _, c, h, value in batch:
            weighted = axis_weight * h
            axis = int(np.argmax(weighted)) if np.any(weighted > 0.0) else int(np.argmax(h / (upper - lower)))
            child_half = h.copy()
            child_half[axis] = h[axis] / 3.0
            offset = np.zeros_like(c)
            offset[axis] = 2.0 * h[axis] / 3.0
            centers.extend([c - offset, c + offset])
            children.append((bound, c, child_half, value))

        new_values, new_tags = evaluate(np.array(centers))
        evaluations += len(centers)
        for k, (bound, c, child_half, value) in enumerate(children):
            r = float(radius(child_half))
            # the middle child keeps the parent's center and its value
            trio = ((centers[2 * k], new_values[2 * k]), (c, value), (centers[2 * k + 1], new_values[2 * k + 1]))
            for point, point_value in trio:
                point_value = float(point_value)
                heapq.heappush(heap, (max(bound, point_value - r), counter, point, child_half, point_value))
                counter += 1

        lowest = int(np.argmin(new_values))
        if new_values[lowest] < best_value:
            best_value = float(new_values[lowest])
            best_point = centers[lowest]
            best_tag = int(new_tags[lowest])

        rounds += 1
        if rounds % PROGRESS_EVERY == 0 and logger.isEnabledFor(logging.DEBUG):
            logger.debug(json.dumps({
                "search": label,
                "round": rounds,
                "regions": len(heap) + len(stalled),
                "evaluations": evaluations,
                "best_value": best_value,
                "certified_bound": min([heap[0][0]] + [entry[0] for entry in stalled]) if heap else None,
                "elapsed": round(time.perf_counter() - started, 3),
            }))

    bounds = [entry[0] for entry in heap] + [entry[0] for entry in stalled]
    certified_bound = min(bounds) if bounds else best_value
    if best_value > 0.0 and stalled:
        gap = min(entry[0] for entry in stalled)
        raise UndecidedError(
            f"{label}: {len(stalled)} regions reached the diameter tolerance with bound {gap:.3e}; "
            "raise epsilon or supply analytic Lipschitz constants",
            gap
        )
    return best_value, best_point, best_tag, certified_bound, evaluations, len(heap) + len(stalled)


def global_minimize(problem: VerifierProblem, subproblem: int) -> SearchResult:
    """Branch-and-bound over (active states, phi_i) for one fault subproblem"""
    active = problem.model.active_states
    m = len(active)

    def evaluate(points: np.ndarray):
        states = np.zeros((len(points), problem.model.n))
        states[:, active] = points[:, :m]
        return evaluate_points(problem, states, points[:, m], subproblem)

    groups = [(list(range(m)), problem.lipschitz_state), ([m], problem.lipschitz_fault)]
    label = f"subproblem {subproblem}"
    try:
        best, point, j, bound, evaluations, regions = lipschitz_minimize(
            evaluate, problem.search_lower, problem.search_upper, groups, problem.settings, label
        )
    except UndecidedError as e:
        e.subproblem = subproblem
        raise
    logger.debug(f"{label}: best {best:.6e}, bound {bound:.6e}, {evaluations} evaluations")
    return SearchResult(subproblem, best, point, j, bound, evaluations, regions)


class VerifierService:
    """Runs the fault subproblems concurrently on a thread pool"""

    def __init__(self, threads: Optional[int] = None):
        self.threads = threads

    async def verify(
        self,
        candidate: LearnerSolution,
        model: NonlinearModel,
        polytope: StatePolytope,
        fault_set: FaultSet,
        config: CegisConfig,
        lipschitz: LipschitzBounds,
        signs: Optional[SignMatrixSet] = None
    ) -> Union[Certificate, Counterexample]:
        """
        Certify a candidate or return the worst counterexample across subproblems

        Raises:
            UndecidedError: no counterexample was found and some subproblem stayed undecided
        """
        problem = build_verifier_problem(candidate, model, polytope, fault_set, config, lipschitz, signs)
        workers = max(1, min(self.threads or config.verifier.threads, fault_set.p))
        loop = asyncio.get_running_loop()
        with ThreadPoolExecutor(max_workers=workers) as executor:
            tasks = [loop.run_in_executor(executor, global_minimize, problem, i) for i in fault_set.subproblems]
            results = await asyncio.gather(*tasks, return_exceptions=True)

        for result in results:
            if isinstance(result, BaseException) and not isinstance(result, UndecidedError):
                raise result

        searches = [r for r in results if isinstance(r, SearchResult)]
        failing = [r for r in searches if r.lambda_star <= 0.0]
        if failing:
            worst = min(failing, key=lambda r: (r.lambda_star, r.subproblem))
            m = len(model.active_states)
            x = problem.embed_state(worst.argmin[:m])
            phi = fault_set.fault_vector(worst.subproblem, float(worst.argmin[m]))
            return Counterexample(linearize(model, x, phi), worst.lambda_star, x, phi, worst.subproblem, worst.j,
                                  sum(r.evaluations for r in searches))

        undecided = [r for r in results if isinstance(r, UndecidedError)]
        if undecided:
            raise min(undecided, key=lambda e: e.gap)

        return Certificate(
            lambda_star=min(r.lambda_star for r in searches),
            certified_bound=min(r.certified_bound for r in searches),
            certified=lipschitz.certified,
            subproblem_bounds=[r.certified_bound for r in searches],
            evaluations=sum(r.evaluations for r in searches)
        )


# Create a singleton instance
verifier_service = VerifierService()
