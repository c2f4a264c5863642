"""
Euler discretization, Jacobian pairs and Lipschitz estimation for control-affine models.
"""

import logging
from typing import Optional

import numpy as np

from models.errors import ConfigurationError, ContractViolation, DivergenceError, EvaluationError
from models.system_models import FaultSet, JacobianPair, LipschitzBounds, NonlinearModel, StatePolytope

logger = logging.getLogger(__name__)

# Relative size of the local perturbation pairs used by estimate_lipschitz
LOCAL_STEP = 1e-3


def _check_finite(label: str, matrix: np.ndarray) -> None:
    bad = np.argwhere(~np.isfinite(np.atleast_2d(matrix)))
    if bad.size:
        index = ",".join(str(int(i)) for i in bad[0])
        raise EvaluationError(f"non-finite entry {label}[{index}]")


def jacobians(model: NonlinearModel, x: np.ndarray, phi: np.ndarray):
    """Raw (A, B) = (I + dt df/dx, dt g) without wrapping them in a JacobianPair"""
    A = np.eye(model.n) + model.dt * np.asarray(model.df_dx(x), dtype=float)
    B = model.dt * np.asarray(model.g_eval(x, phi), dtype=float)
    _check_finite("A", A)
    _check_finite("B", B)
    return A, B


def linearize(model: NonlinearModel, x_bar: np.ndarray, phi_bar: np.ndarray) -> JacobianPair:
    """
    Jacobian pair of the Euler-discretized model at (x_bar, phi_bar)

    Args:
        model: Control-affine model
        x_bar: State sample
        phi_bar: Fault vector in Phi

    Returns:
        JacobianPair with A = I + dt df/dx(x_bar) and B = dt g(x_bar, phi_bar)
    """
    x_bar = np.asarray(x_bar, dtype=float)
    phi_bar = np.asarray(phi_bar, dtype=float)
    if x_bar.shape != (model.n,) or phi_bar.shape != (model.p,):
        raise ContractViolation(
            f"linearize expects x of length {model.n} and phi of length {model.p}, "
            f"got {x_bar.shape} and {phi_bar.shape}"
        )
    A, B = jacobians(model, x_bar, phi_bar)
    return JacobianPair(A, B, x_bar.copy(), phi_bar.copy())


def step(model: NonlinearModel, x: np.ndarray, u: np.ndarray, phi: np.ndarray, time_index: int = 0) -> np.ndarray:
    """One explicit Euler step x + dt (f(x) + g(x, phi) u); u must already be saturated"""
    x_next = x + model.dt * model.rhs(x, u, phi)
    if not np.all(np.isfinite(x_next)):
        raise DivergenceError("state became non-finite", time_index)
    return x_next


def _sample_states(polytope: StatePolytope, active, count: int, rng: np.random.Generator) -> np.ndarray:
    """Uniform samples of the bounding box restricted to D; inactive coordinates stay at 0"""
    lower = polytope.lower[active]
    upper = polytope.upper[active]
    accepted = []
    total = 0
    for _ in range(50):
        batch = np.zeros((4 * count, polytope.n))
        batch[:, active] = rng.uniform(lower, upper, size=(4 * count, len(active)))
        inside = np.all(batch @ polytope.L.T <= 1.0, axis=1)
        accepted.append(batch[inside])
        total += int(inside.sum())
        if total >= count:
            break
    points = np.vstack(accepted)[:count]
    if len(points) < 2:
        raise ConfigurationError("could not sample the state polytope; it appears to have no interior")
    return points


def estimate_lipschitz(
    model: NonlinearModel,
    polytope: StatePolytope,
    fault_set: FaultSet,
    samples: int = 200,
    safety_factor: float = 2.0,
    seed: int = 0
) -> LipschitzBounds:
    """
    Sampled Lipschitz constants of x -> A(x) and (x, phi) -> B(x, phi)

    Takes the largest difference ratio ||dA|| / ||dx|| and ||dB|| / (||dx|| + ||dphi||)
    over random pairs, local perturbation pairs, same-state fault pairs and the
    column Jacobians of g, then multiplies by the safety factor.

    Args:
        model: Control-affine model
        polytope: State domain
        fault_set: Single-fault set
        samples: Number of sampled points (at least 2)
        safety_factor: Inflation applied to the sampled maxima
        seed: Seed of the sampling generator

    Returns:
        LipschitzBounds with certified = False
    """
    if samples < 2:
        raise ContractViolation(f"estimate_lipschitz needs at least 2 samples, got {samples}")
    if not safety_factor >= 1.0:
        raise ConfigurationError(f"safety factor must be at least 1, got {safety_factor}")
    active = model.active_states
    widths = polytope.upper[active] - polytope.lower[active]
    if np.any(widths <= 0.0):
        raise ConfigurationError("state domain has zero volume; cannot estimate Lipschitz constants")

    rng = np.random.default_rng(seed)
    xs = _sample_states(polytope, active, samples, rng)
    subproblems = rng.integers(0, fault_set.p, size=len(xs))
    phis = np.ones((len(xs), fault_set.p))
    phis[np.arange(len(xs)), subproblems] = rng.uniform(0.0, 1.0, size=len(xs))

    pairs = [jacobians(model, x, phi) for x, phi in zip(xs, phis)]
    A = np.array([a for a, _ in pairs])
    B = np.array([b for _, b in pairs])

    kappa_A = 0.0
    kappa_B = 0.0

    # Random pairs
    first, second = np.triu_indices(len(xs), k=1)
    dx = np.linalg.norm(xs[first] - xs[second], axis=1)
    dphi = np.linalg.norm(phis[first] - phis[second], axis=1)
    dA = np.linalg.norm(A[first] - A[second], ord=2, axis=(1, 2))
    dB = np.linalg.norm(B[first] - B[second], ord=2, axis=(1, 2))
    moved = dx > 0.0
    if np.any(moved):
        kappa_A = max(kappa_A, float(np.max(dA[moved] / dx[moved])))
    kappa_B = max(kappa_B, float(np.max(dB / np.maximum(dx + dphi, np.finfo(float).tiny))))

    # Local pairs along random directions
    for x, phi, a, b in zip(xs, phis, A, B):
        direction = np.zeros(model.n)
        direction[active] = rng.normal(size=len(active)) * widths
        direction *= LOCAL_STEP / np.linalg.norm(direction[active] / widths)
        a_near, b_near = jacobians(model, x + direction, phi)
        norm = np.linalg.norm(direction)
        kappa_A = max(kappa_A, float(np.linalg.norm(a_near - a, 2) / norm))
        kappa_B = max(kappa_B, float(np.linalg.norm(b_near - b, 2) / norm))

        # Column Jacobians of g bound the state derivative of B
        columns = model.dg_dx_cols(x, phi)
        derivative = model.dt * np.sqrt(sum(np.linalg.norm(np.atleast_2d(c), 2) ** 2 for c in columns))
        kappa_B = max(kappa_B, float(derivative))

    # Same state, fault coordinate swept over [0, 1]
    for x in xs[: max(2, len(xs) // 4)]:
        for i in fault_set.subproblems:
            _, b_nominal = jacobians(model, x, fault_set.fault_vector(i, 1.0))
            _, b_lost = jacobians(model, x, fault_set.fault_vector(i, 0.0))
            kappa_B = max(kappa_B, float(np.linalg.norm(b_nominal - b_lost, 2)))

    logger.info(
        f"Sampled Lipschitz constants for {model.name}: kappa_A={kappa_A:.4e}, kappa_B={kappa_B:.4e} "
        f"({len(xs)} points, safety factor {safety_factor})"
    )
    return LipschitzBounds(
        safety_factor * kappa_A,
        safety_factor * kappa_B,
        certified=False,
        safety_factor=safety_factor,
        samples=len(xs)
    )


def resolve_lipschitz(
    model: NonlinearModel,
    polytope: StatePolytope,
    fault_set: FaultSet,
    kappa_A: Optional[float] = None,
    kappa_B: Optional[float] = None,
    samples: int = 200,
    safety_factor: float = 2.0,
    seed: int = 0
) -> LipschitzBounds:
    """Analytic bounds when both are supplied, otherwise a sampled estimate"""
    if kappa_A is not None and kappa_B is not None:
        logger.info(f"Using analytic Lipschitz constants kappa_A={kappa_A}, kappa_B={kappa_B}")
        return LipschitzBounds(kappa_A, kappa_B, certified=True)
    if kappa_A is not None or kappa_B is not None:
        logger.warning("Only one analytic Lipschitz constant supplied; estimating both from samples")
    return estimate_lipschitz(model, polytope, fault_set, samples, safety_factor, seed)
