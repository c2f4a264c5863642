"""
Learner: keeps the counterexample store and solves the sample-restricted maximal-ellipsoid SDP.
"""

import logging
from typing import List, Optional

import numpy as np
from scipy.optimize import linprog

from models.errors import ContractViolation, ExtractionError, InfeasibleError, SolverFailure, UndecidedError
from models.ldi_models import SignMatrixSet
from models.synthesis_models import CegisConfig, Controller, LearnerSolution, OutcomeKind, SampleSet
from models.system_models import FaultSet, InputBox, JacobianPair, LipschitzBounds, NonlinearModel, StatePolytope
from solver.client import SdpSolverClient, sdp_solver
from solver.problem import AffineExpr, AffineTerm, LmiConstraint, SdpOutcome, SdpProblem
from utils.ldi import build_xi, enumerate_sign_matrices, min_eig, operator_norm

logger = logging.getLogger(__name__)

DUPLICATE_DISTANCE = 1e-12
MIN_Q_EIGENVALUE = 1e-10


def add_sample(sample_set: SampleSet, pair: JacobianPair, iteration: int = 0) -> bool:
    """
    Append a Jacobian pair to the store

    Returns:
        False (with a warning) when the pair duplicates a stored one, True otherwise
    """
    nearest = sample_set.min_distance(pair)
    if nearest < DUPLICATE_DISTANCE:
        logger.warning(f"Rejected duplicate sample at iteration {iteration} (distance {nearest:.3e})")
        return False
    sample_set.pairs.append(pair)
    sample_set.tags.append(iteration)
    return True


def prune_interior_samples(pairs: List[JacobianPair]) -> List[int]:
    """
    Indices of samples that are not convex combinations of the other kept samples

    Each (A, B) is flattened; one feasibility LP per sample decides hull membership.
    """
    points = np.array([np.concatenate([p.A.ravel(), p.B.ravel()]) for p in pairs])
    kept = list(range(len(points)))
    for index in range(len(points)):
        others = [k for k in kept if k != index]
        if len(others) < 2:
            continue
        # find weights w >= 0, sum w = 1, sum w_k v_k = v_index
        A_eq = np.vstack([points[others].T, np.ones((1, len(others)))])
        b_eq = np.append(points[index], 1.0)
        res = linprog(np.zeros(len(others)), A_eq=A_eq, b_eq=b_eq, bounds=[(0, None)] * len(others), method="highs")
        if res.status == 0:
            kept.remove(index)
    if len(kept) < len(points):
        logger.info(f"Convex-hull pruning kept {len(kept)} of {len(points)} samples")
    return kept


def _identity(size: int, scale: float = 1.0) -> np.ndarray:
    return scale * np.eye(size)


def assemble_learner_sdp(
    sample_set: SampleSet,
    config: CegisConfig,
    polytope: StatePolytope,
    box: InputBox,
    signs: SignMatrixSet,
    fixed_gain: Optional[np.ndarray] = None
) -> SdpProblem:
    """
    Build the learner SDP over the stored samples

    Args:
        sample_set: Non-empty sample store
        config: Hyperparameters (eta, epsilon, tau)
        polytope: State domain rows l_i
        box: Saturation thresholds
        signs: Sign-pattern matrices E_j
        fixed_gain: When given, Y is replaced by fixed_gain @ Q everywhere

    Returns:
        Problem maximizing trace(Q)
    """
    if not len(sample_set):
        raise ContractViolation("the learner needs at least one sample")
    n = polytope.n
    p = box.p
    eta, eps, tau = config.eta, config.epsilon, config.tau

    pairs = sample_set.pairs
    if config.prune_interior_samples and len(pairs) > 2:
        pairs = [pairs[k] for k in prune_interior_samples(pairs)]

    problem = SdpProblem("learner" if fixed_gain is None else "fixed-gain learner")
    problem.add_variable("Q", (n, n), symmetric=True)
    problem.add_variable("Z", (p, n))
    if fixed_gain is None:
        problem.add_variable("Y", (p, n))
    else:
        fixed_gain = np.atleast_2d(np.asarray(fixed_gain, dtype=float))
        if fixed_gain.shape != (p, n):
            raise ContractViolation(f"fixed gain must be {p}x{n}, got {fixed_gain.shape}")

    for index, pair in enumerate(pairs):
        A, B = pair.A, pair.B
        for j in range(len(signs)):
            E, E_bar = signs[j], signs.complement(j)
            M = AffineExpr((n, n), terms=[AffineTerm("Z", left=B @ E_bar)])
            if fixed_gain is None:
                M.plus(AffineTerm("Q", left=A)).plus(AffineTerm("Y", left=B @ E))
            else:
                M.plus(AffineTerm("Q", left=A + B @ E @ fixed_gain))
            problem.add_constraint(LmiConstraint(f"xi[{index},{j}]", [n, n, n], {
                (0, 0): AffineExpr((n, n), -_identity(n, eps), [AffineTerm("Q", scale=tau)]),
                (1, 1): AffineExpr.const(_identity(n, 1.0 - tau - eps)),
                (2, 0): M,
                (2, 2): AffineExpr((n, n), -_identity(n, eps), [AffineTerm("Q")]),
            }))

    for i, row in enumerate(polytope.L):
        problem.add_constraint(LmiConstraint(f"state[{i}]", [1, n], {
            (0, 0): AffineExpr.const([[1.0]]),
            (1, 0): AffineExpr((n, 1), terms=[AffineTerm("Q", right=row[:, None])]),
            (1, 1): AffineExpr((n, n), terms=[AffineTerm("Q")]),
        }))

    for i, bound in enumerate(box.u_max):
        unit = np.zeros((p, 1))
        unit[i, 0] = 1.0
        problem.add_constraint(LmiConstraint(f"input[{i}]", [1, n], {
            (0, 0): AffineExpr.const([[bound ** 2]]),
            (1, 0): AffineExpr((n, 1), terms=[AffineTerm("Z", transpose=True, right=unit)]),
            (1, 1): AffineExpr((n, n), terms=[AffineTerm("Q")]),
        }))

    problem.add_constraint(LmiConstraint("q_bound", [n], {
        (0, 0): AffineExpr((n, n), _identity(n, eta), [AffineTerm("Q", scale=-1.0)]),
    }))

    y_transpose = (AffineTerm("Y", transpose=True) if fixed_gain is None
                   else AffineTerm("Q", right=fixed_gain.T))
    for name, term in (("y_norm", y_transpose), ("z_norm", AffineTerm("Z", transpose=True))):
        problem.add_constraint(LmiConstraint(name, [p, n], {
            (0, 0): AffineExpr.const(_identity(p, eta / 2.0)),
            (1, 0): AffineExpr((n, p), terms=[term]),
            (1, 1): AffineExpr.const(_identity(n, eta / 2.0)),
        }))

    problem.maximize("Q", np.eye(n))
    return problem


def solution_violations(
    solution: LearnerSolution,
    sample_set: SampleSet,
    config: CegisConfig,
    signs: SignMatrixSet
) -> List[str]:
    """Independent re-check of the learner invariants; empty when all hold"""
    slack = 10.0 * config.solver_tol * max(1.0, config.eta)
    eps, eta = config.epsilon, config.eta
    n = solution.Q.shape[0]
    violations = []
    for index, pair in enumerate(sample_set.pairs):
        for j in range(len(signs)):
            xi = build_xi(solution.Q, solution.Y, solution.Z, pair.A, pair.B, signs[j], config.tau)
            value = min_eig(xi - eps * np.eye(3 * n))
            if value < -slack:
                violations.append(f"xi[{index},{j}] min eigenvalue {value:.3e}")
    q_margin = min_eig(eta * np.eye(n) - solution.Q)
    if q_margin < -slack:
        violations.append(f"Q exceeds eta by {-q_margin:.3e}")
    for label, matrix in (("Y", solution.Y), ("Z", solution.Z)):
        norm = operator_norm(matrix)
        if norm > eta / 2.0 + slack:
            violations.append(f"||{label}|| = {norm:.6g} exceeds eta/2")
    return violations


def learn(
    sample_set: SampleSet,
    config: CegisConfig,
    polytope: StatePolytope,
    box: InputBox,
    signs: Optional[SignMatrixSet] = None,
    iteration: Optional[int] = None,
    fixed_gain: Optional[np.ndarray] = None,
    solver: SdpSolverClient = sdp_solver
) -> LearnerSolution:
    """
    Solve the learner SDP and re-verify the result

    Raises:
        InfeasibleError: the SDP is certified infeasible
        SolverFailure: the backend broke down, or its answer failed the re-check
    """
    signs = signs or enumerate_sign_matrices(box.p)
    problem = assemble_learner_sdp(sample_set, config, polytope, box, signs, fixed_gain)
    status, values = solver.solve_sdp(problem, config.solver_tol)

    if status.outcome == SdpOutcome.INFEASIBLE:
        raise InfeasibleError(f"learner SDP infeasible with {len(sample_set)} samples", iteration)
    if status.outcome != SdpOutcome.OPTIMAL:
        raise SolverFailure(f"learner SDP ended {status.outcome.value} ({status.detail})")

    Q = values["Q"]
    Y = fixed_gain @ Q if fixed_gain is not None else values["Y"]
    solution = LearnerSolution(Q, Y, values["Z"], status.objective)

    violations = solution_violations(solution, sample_set, config, signs)
    if violations:
        raise SolverFailure("learner solution failed the post-solve check: " + "; ".join(violations[:5]))
    logger.debug(f"Learner optimum trace(Q)={solution.objective:.6g} over {problem.count('xi')} certificate LMIs")
    return solution


def extract_controller(solution: LearnerSolution, box: InputBox) -> Controller:
    """P = Q^-1, K = Y Q^-1, H = Z Q^-1"""
    Q = solution.Q
    smallest = min_eig(Q)
    if smallest <= MIN_Q_EIGENVALUE:
        raise ExtractionError(
            f"Q is near-singular (min eigenvalue {smallest:.3e}); increase epsilon to keep the ellipsoid open"
        )
    P = np.linalg.inv(Q)
    P = 0.5 * (P + P.T)
    K = np.linalg.solve(Q, solution.Y.T).T
    H = np.linalg.solve(Q, solution.Z.T).T
    residual = float(np.max(np.abs(P @ Q - np.eye(Q.shape[0]))))
    if residual > 1e-6:
        raise ExtractionError(f"P Q differs from the identity by {residual:.3e}; increase epsilon")
    return Controller(K, H, P, Q, box.u_max.copy())


async def roa_for_fixed_gain(
    K: np.ndarray,
    model: NonlinearModel,
    polytope: StatePolytope,
    box: InputBox,
    fault_set: FaultSet,
    config: CegisConfig,
    lipschitz: LipschitzBounds
) -> np.ndarray:
    """
    Largest certified invariant ellipsoid for a fixed gain

    Runs its own learner / verifier loop with Y = K Q.

    Returns:
        Q of the certified ellipsoid {x : x' Q^-1 x <= 1}

    Raises:
        InfeasibleError: no invariant ellipsoid exists for this gain
        UndecidedError: the loop ended without a certificate
    """
    from services.cegis_service import cegis_service

    K = np.atleast_2d(np.asarray(K, dtype=float))
    if K.shape != (model.p, model.n):
        raise ContractViolation(f"gain must be {model.p}x{model.n}, got {K.shape}")
    outcome = await cegis_service.run(model, polytope, box, fault_set, config, lipschitz, fixed_gain=K)
    if outcome.kind == OutcomeKind.INFEASIBLE:
        raise InfeasibleError(f"no invariant ellipsoid for the given gain ({outcome.message})", outcome.iterations)
    if not outcome.converged:
        raise UndecidedError(f"region-of-attraction loop ended {outcome.kind.value}: {outcome.message}",
                             gap=outcome.gap if outcome.gap is not None else float("nan"))
    return outcome.controller.Q
