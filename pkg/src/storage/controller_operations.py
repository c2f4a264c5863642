"""
Storage operations for controller files.
"""

import logging
from typing import Any, Dict, Optional, Tuple

import numpy as np

from models.errors import ConfigurationError
from models.synthesis_models import CegisConfig, Controller, SampleSet
from .core import FORMAT_VERSION, PathLike, read_json, write_json

logger = logging.getLogger(__name__)

CONTROLLER_KIND = "controller"


def save_controller(
    path: PathLike,
    controller: Controller,
    config: CegisConfig,
    problem: Dict[str, Any],
    samples: Optional[SampleSet] = None,
    lipschitz: Optional[Dict[str, Any]] = None
) -> None:
    """
    Save a controller with everything needed to re-verify it

    Args:
        path: Target file
        controller: Gains, ellipsoid and certificate
        config: Loop hyperparameters used for synthesis
        problem: Echo of the problem file
        samples: Final sample set, stored with the iteration that added each pair
        lipschitz: Lipschitz bounds used by the verifier
    """
    document = {
        "kind": CONTROLLER_KIND,
        "version": FORMAT_VERSION,
        "controller": controller.to_dict(),
        "hyperparameters": config.to_dict(),
        "lipschitz": lipschitz,
        "problem": problem,
    }
    if samples is not None:
        document["samples"] = [
            {"iteration": tag, "x": pair.x, "phi": pair.phi} for pair, tag in zip(samples.pairs, samples.tags)
        ]
    write_json(path, document)
    logger.info(f"Controller saved to {path}")


def load_controller(path: PathLike) -> Tuple[Controller, Dict[str, Any]]:
    """
    Load a controller file

    Returns:
        (controller, full document)

    Raises:
        ConfigurationError: the file is not a controller document or its matrices are inconsistent
    """
    document = read_json(path)
    if document.get("kind") != CONTROLLER_KIND or "controller" not in document:
        raise ConfigurationError(f"{path}: not a controller file")
    data = document["controller"]
    for key in ("K", "u_max"):
        if data.get(key) is None:
            raise ConfigurationError(f"{path}: controller is missing '{key}'")
    try:
        K = np.atleast_2d(np.asarray(data["K"], dtype=float))
        p, n = K.shape
        # Hand-written files may carry only K; H and the ellipsoid are then unknown
        H = np.asarray(data["H"], dtype=float) if data.get("H") is not None else np.zeros((p, n))
        P = np.asarray(data["P"], dtype=float) if data.get("P") is not None else np.full((n, n), np.nan)
        Q = np.asarray(data["Q"], dtype=float) if data.get("Q") is not None else np.full((n, n), np.nan)
        controller = Controller(K, H, P, Q, data["u_max"], data.get("certificate"))
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{path}: malformed controller matrices ({e})")

    if controller.H.shape != (p, n) or controller.P.shape != (n, n) or controller.Q.shape != (n, n):
        raise ConfigurationError(f"{path}: controller matrices disagree with K of shape {K.shape}")
    if controller.u_max.shape != (p,):
        raise ConfigurationError(f"{path}: u_max needs {p} entries")
    logger.info(f"Loaded {p}x{n} controller from {path}")
    return controller, document
