"""
Closed-loop simulation u = sat(K (x - x_ref)) on the Euler-discretized model, and tracking metrics.
"""

import logging
from typing import Any, Dict, List, Optional

import numpy as np
import pandas as pd

from models.errors import ContractViolation, DivergenceError
from models.simulation_models import FaultSchedule, ReferenceSignal, Trace
from models.synthesis_models import Controller
from models.system_models import NonlinearModel
from services.dynamics_service import step
from utils.ldi import saturate

logger = logging.getLogger(__name__)

DIVERGENCE_NORM = 1e6
# Samples within this fraction of the bound count as saturated
SATURATION_SLACK = 1e-9


def simulate(
    model: NonlinearModel,
    controller: Controller,
    schedule: FaultSchedule,
    reference: ReferenceSignal,
    horizon: float,
    x0: Optional[np.ndarray] = None
) -> Trace:
    """
    Simulate the saturated closed loop on the uniform grid t_k = k dt

    Args:
        model: Control-affine model
        controller: Gain K, saturation box and (optionally) P for V(e) = e' P e
        schedule: Fault phases covering [0, horizon]
        reference: Reference signal x_ref(t)
        horizon: Final time T in seconds
        x0: Initial state (defaults to the reference at t = 0)

    Returns:
        Trace with round(T / dt) + 1 rows

    Raises:
        DivergenceError: the state norm exceeded 1e6
    """
    if controller.K.shape != (model.p, model.n):
        raise ContractViolation(f"controller gain is {controller.K.shape}, model needs {(model.p, model.n)}")
    if not horizon > 0:
        raise ContractViolation(f"horizon must be positive, got {horizon}")
    schedule.validate(model.p, horizon)
    if reference.n != model.n:
        raise ContractViolation(f"reference has {reference.n} channels, model has {model.n} states")

    steps = int(round(horizon / model.dt))
    box = controller.box
    use_lyapunov = (controller.P is not None and controller.P.shape == (model.n, model.n)
                    and bool(np.all(np.isfinite(controller.P))))

    t = np.arange(steps + 1) * model.dt
    xs = np.empty((steps + 1, model.n))
    us = np.empty((steps + 1, model.p))
    phis = np.empty((steps + 1, model.p))
    refs = np.empty((steps + 1, model.n))
    values = np.full(steps + 1, np.nan)
    phases = np.empty(steps + 1, dtype=int)

    x = reference.at(0.0) if x0 is None else np.asarray(x0, dtype=float).copy()
    if x.shape != (model.n,):
        raise ContractViolation(f"initial state must have {model.n} entries")

    for k in range(steps + 1):
        phase = schedule.phase_index(t[k])
        phi = schedule.phases[phase].phi
        x_ref = reference.at(t[k])
        error = x - x_ref
        u = saturate(controller.K @ error, box)

        xs[k], us[k], phis[k], refs[k], phases[k] = x, u, phi, x_ref, phase
        if use_lyapunov:
            values[k] = float(error @ controller.P @ error)

        if k == steps:
            break
        x = step(model, x, u, phi, k)
        if np.linalg.norm(x) > DIVERGENCE_NORM:
            raise DivergenceError(f"state norm exceeded {DIVERGENCE_NORM:g}", k + 1)

    logger.debug(f"Simulated {model.name} for {horizon} s ({steps + 1} samples)")
    return Trace(t, xs, us, phis, refs, values if use_lyapunov else None, phases)


def metrics(trace: Trace, u_max: Optional[np.ndarray] = None) -> Dict[str, Any]:
    """
    Per-phase tracking metrics

    For every fault phase: initial, peak, final and steady-state error norms
    (steady state is the mean over the last 10% of the phase) and the fraction
    of samples each actuator spends at its bound.
    """
    if len(trace) == 0:
        raise ContractViolation("metrics need a non-empty trace")
    frame = pd.DataFrame({
        "t": trace.t,
        "phase": trace.phase,
        "error": np.linalg.norm(trace.error, axis=1),
    })
    if u_max is not None:
        saturated = np.abs(trace.u) >= np.asarray(u_max) * (1.0 - SATURATION_SLACK)
        for k in range(saturated.shape[1]):
            frame[f"sat{k + 1}"] = saturated[:, k]

    phases: List[Dict[str, Any]] = []
    for phase, group in frame.groupby("phase", sort=True):
        tail = max(1, int(np.ceil(0.1 * len(group))))
        entry = {
            "phase": int(phase),
            "t_start": float(group["t"].iloc[0]),
            "t_end": float(group["t"].iloc[-1]),
            "phi": trace.phi[group.index[0]].tolist(),
            "initial_error": float(group["error"].iloc[0]),
            "max_error": float(group["error"].max()),
            "final_error": float(group["error"].iloc[-1]),
            "steady_state_error": float(group["error"].iloc[-tail:].mean()),
        }
        if u_max is not None:
            columns = [c for c in group.columns if c.startswith("sat")]
            entry["saturation_duty"] = [float(group[c].mean()) for c in columns]
        phases.append(entry)

    return {
        "samples": len(trace),
        "max_error": float(frame["error"].max()),
        "final_error": float(frame["error"].iloc[-1]),
        "phases": phases,
    }
