"""
Storage operations for run reports, simulation traces, metrics and region-of-attraction files.
"""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

import numpy as np
import pandas as pd

from models.base_model import to_plain
from models.errors import ContractViolation
from models.simulation_models import Trace
from models.synthesis_models import CegisConfig, CegisOutcome
from models.system_models import LipschitzBounds
from .core import FORMAT_VERSION, PathLike, write_json

logger = logging.getLogger(__name__)

BOUNDARY_POINTS = 360
CONTROL_LAW = "u = sat_umax(K (x - x_ref)), inputs in physical units (N)"
TRACE_COMMENT = "#"


def save_run_report(
    path: PathLike,
    outcome: CegisOutcome,
    config: CegisConfig,
    problem: Dict[str, Any],
    lipschitz: LipschitzBounds
) -> None:
    """Outcome, full iteration history and the inputs that produced them"""
    document = {
        "kind": "run-report",
        "version": FORMAT_VERSION,
        "outcome": outcome.summary(),
        "certificate": outcome.certificate,
        "history": outcome.history,
        "lipschitz": dict(lipschitz.to_dict(), provenance=lipschitz.provenance),
        "hyperparameters": config.to_dict(),
        "problem": problem,
    }
    write_json(path, document)
    logger.info(f"Run report saved to {path}")


def save_trace(
    path: PathLike,
    trace: Trace,
    problem: Optional[Dict[str, Any]] = None,
    scenario: Optional[Dict[str, Any]] = None
) -> None:
    """
    CSV with header t, x1..xn, u1..up, phi1..phip, ref1..refn, V, phase

    The columns are preceded by "# key: value" lines carrying the control law
    and, when given, one-line JSON echoes of the problem and scenario.
    Read it back with load_trace.
    """
    frame = trace.to_frame()
    metadata = {"format_version": FORMAT_VERSION, "control_law": CONTROL_LAW}
    if problem is not None:
        metadata["problem"] = problem
    if scenario is not None:
        metadata["scenario"] = scenario

    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as stream:
        for key, value in metadata.items():
            text = value if isinstance(value, str) else json.dumps(to_plain(value), separators=(",", ":"))
            stream.write(f"{TRACE_COMMENT} {key}: {text}\n")
        frame.to_csv(stream, index=False)
    logger.info(f"Trace with {len(frame)} rows saved to {path}")


def load_trace(path: PathLike) -> Tuple[pd.DataFrame, Dict[str, Any]]:
    """
    Read a trace written by save_trace

    Returns:
        Tuple of (columns as a DataFrame, header metadata with JSON values decoded)
    """
    metadata: Dict[str, Any] = {}
    with Path(path).open() as stream:
        for line in stream:
            if not line.startswith(TRACE_COMMENT):
                break
            key, _, text = line[len(TRACE_COMMENT):].strip().partition(": ")
            try:
                metadata[key] = json.loads(text)
            except json.JSONDecodeError:
                metadata[key] = text
    return pd.read_csv(path, comment=TRACE_COMMENT), metadata


def save_metrics(path: PathLike, report: Dict[str, Any], problem: Dict[str, Any], scenario: Dict[str, Any]) -> None:
    document = {
        "kind": "metrics",
        "version": FORMAT_VERSION,
        "control_law": CONTROL_LAW,
        "metrics": report,
        "scenario": scenario,
        "problem": problem,
    }
    write_json(path, document)


def ellipse_boundary(Q: np.ndarray, points: int = BOUNDARY_POINTS) -> np.ndarray:
    """
    Points on {x : x' Q^-1 x = 1} for a 2x2 Q

    With Q = C C', x = C [cos t, sin t] lies on the boundary.
    """
    Q = np.asarray(Q, dtype=float)
    if Q.shape != (2, 2):
        raise ContractViolation(f"boundary polyline needs a 2x2 ellipsoid, got {Q.shape}")
    factor = np.linalg.cholesky(0.5 * (Q + Q.T))
    angles = 2.0 * np.pi * np.arange(points) / points
    return (factor @ np.vstack([np.cos(angles), np.sin(angles)])).T


def save_roa(
    path: PathLike,
    K: np.ndarray,
    Q: np.ndarray,
    problem: Dict[str, Any],
    detuned: Optional[Dict[str, Any]] = None
) -> None:
    """
    Save a certified region of attraction

    Args:
        path: Target file
        K: Gain the ellipsoid was computed for
        Q: Ellipsoid shape, region {x : x' Q^-1 x <= 1}
        problem: Echo of the problem file
        detuned: Optional comparison entry for a scaled gain
    """
    document = {
        "kind": "roa",
        "version": FORMAT_VERSION,
        "K": K,
        "Q": Q,
        "trace_Q": float(np.trace(Q)),
        "problem": problem,
    }
    if Q.shape == (2, 2):
        document["boundary"] = ellipse_boundary(Q)
    if detuned is not None:
        document["comparison"] = detuned
    write_json(path, document)
    logger.info(f"Region of attraction saved to {path} (trace(Q) = {document['trace_Q']:.6g})")
