import sys
from pathlib import Path

import numpy as np
import pytest

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from benchmarks import auv2, default_params, discrete_linear_test  # noqa: E402
from models import CegisConfig, Controller, FaultSet, InputBox, StatePolytope, VerifierSettings  # noqa: E402

# Gain published for the AUV2 benchmark (surge, yaw rate) -> three thrusters
PUBLISHED_K = 1e3 * np.array([
    [-43.987, 0.308],
    [-30.985, 7.948],
    [-1.187, 37.481],
])


@pytest.fixture
def root_dir() -> Path:
    return ROOT


@pytest.fixture
def auv2_params():
    return default_params("auv2")


@pytest.fixture
def auv2_model(auv2_params):
    return auv2(auv2_params, dt=0.01)


@pytest.fixture
def auv2_domain():
    return StatePolytope.from_box([-2.0, -2.0], [2.0, 2.0])


@pytest.fixture
def published_controller():
    eye = np.eye(2)
    return Controller(PUBLISHED_K, PUBLISHED_K, eye, eye, np.full(3, 38.0))


@pytest.fixture
def unit_interval():
    return StatePolytope.from_box([-1.0], [1.0])


def scalar_plant(a: float, b, dt: float = 0.01):
    """x+ = a x + b diag(phi) u, b a scalar or a row of input gains"""
    return discrete_linear_test([[a]], np.atleast_2d(b), dt)


def scalar_config(**overrides) -> CegisConfig:
    settings = {"lipschitz_scale": "candidate", "max_evaluations": 200_000, "threads": 1}
    settings.update(overrides.pop("verifier", {}))
    return CegisConfig(verifier=VerifierSettings(**settings), **overrides)


def scalar_setup(a: float, b, u_max=1.0):
    model = scalar_plant(a, b)
    p = model.p
    return model, StatePolytope.from_box([-1.0], [1.0]), InputBox(np.full(p, u_max)), FaultSet(p)
