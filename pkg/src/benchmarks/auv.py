"""
Hovering AUV benchmarks.

auv2: surge velocity x1 and yaw rate x2, three fixed thrusters.
auv5: surge x1, sway x2, yaw rate x3, yaw angle x4 and its integral x5,
four thrusters in an X configuration.

Default coefficients are plausible values for a small hovering vehicle
(added mass included in m and J_z); they are not measured data. They keep
every diagonal drag entry of the Jacobian at or below -0.1 /s over the [-2, 2] velocity box,
so the linear term dominates the quadratic one (X_u >= 4 X_uu + 0.1 m, and
likewise for sway and yaw).
"""

import numpy as np

from models.errors import ConfigurationError
from models.system_models import NonlinearModel
from models.vehicle_models import AuvParams

DEFAULT_AUV2_PARAMS = {
    "m": 500.0,
    "J_z": 300.0,
    "X_u": 60.0,
    "X_uu": 2.0,
    "N_r": 45.0,
    "N_rr": 3.0,
    "thrusters": [
        {"alpha": np.pi / 2, "lx": -0.8, "ly": -0.3},
        {"alpha": np.pi / 2, "lx": -0.8, "ly": 0.3},
        {"alpha": np.pi, "lx": 0.9, "ly": 0.0},
    ],
    "u_max": [38.0, 38.0, 38.0],
}

DEFAULT_AUV5_PARAMS = {
    "m": 500.0,
    "J_z": 150.0,
    "X_u": 80.0,
    "X_uu": 2.0,
    "Y_v": 90.0,
    "Y_vv": 3.0,
    "N_r": 120.0,
    "N_rr": 5.0,
    "thrusters": [
        {"alpha": np.pi / 4, "lx": 0.6, "ly": -0.3},
        {"alpha": 3 * np.pi / 4, "lx": 0.6, "ly": 0.3},
        {"alpha": 3 * np.pi / 4, "lx": -0.6, "ly": -0.3},
        {"alpha": np.pi / 4, "lx": -0.6, "ly": 0.3},
    ],
    "u_max": [38.0, 38.0, 38.0, 38.0],
}


def default_params(name: str) -> AuvParams:
    if name == "auv2":
        return AuvParams.from_dict(DEFAULT_AUV2_PARAMS)
    if name == "auv5":
        return AuvParams.from_dict(DEFAULT_AUV5_PARAMS)
    raise ConfigurationError(f"no default parameters for {name}")


def auv2(params: AuvParams, dt: float = 0.01) -> NonlinearModel:
    """Surge / yaw-rate model; the input matrix does not depend on the state"""
    if len(params.thrusters) != 3:
        raise ConfigurationError(f"auv2 needs 3 thrusters, got {len(params.thrusters)}")
    m, J = params.m, params.J_z
    actuation = np.vstack([params.surge_row / m, params.moment_row / J])

    def f_eval(x):
        return np.array([
            (-params.X_u * x[0] - params.X_uu * x[0] ** 2) / m,
            (-params.N_r * x[1] - params.N_rr * x[1] ** 2) / J,
        ])

    def df_dx(x):
        return np.diag([
            -(params.X_u + 2.0 * params.X_uu * x[0]) / m,
            -(params.N_r + 2.0 * params.N_rr * x[1]) / J,
        ])

    def g_eval(x, phi):
        return actuation * phi[None, :]

    def dg_dx_cols(x, phi):
        return [np.zeros((2, 2)) for _ in range(3)]

    return NonlinearModel("auv2", 2, 3, f_eval, g_eval, df_dx, dg_dx_cols, dt)


def auv5(params: AuvParams, dt: float = 0.01) -> NonlinearModel:
    """Surge / sway / yaw model with Coriolis coupling and integral yaw action"""
    if len(params.thrusters) != 4:
        raise ConfigurationError(f"auv5 needs 4 thrusters, got {len(params.thrusters)}")
    m, J = params.m, params.J_z
    actuation = np.vstack([
        params.surge_row / m,
        params.sway_row / m,
        params.moment_row / J,
        np.zeros(4),
        np.zeros(4),
    ])

    def f_eval(x):
        return np.array([
            (-params.X_u * x[0] - params.X_uu * x[0] ** 2) / m + x[1] * x[2],
            (-params.Y_v * x[1] - params.Y_vv * x[1] ** 2) / m - x[0] * x[2],
            (-params.N_r * x[2] - params.N_rr * x[2] ** 2) / J,
            x[2],
            x[3],
        ])

    def df_dx(x):
        return np.array([
            [-(params.X_u + 2.0 * params.X_uu * x[0]) / m, x[2], x[1], 0.0, 0.0],
            [-x[2], -(params.Y_v + 2.0 * params.Y_vv * x[1]) / m, -x[0], 0.0, 0.0],
            [0.0, 0.0, -(params.N_r + 2.0 * params.N_rr * x[2]) / J, 0.0, 0.0],
            [0.0, 0.0, 1.0, 0.0, 0.0],
            [0.0, 0.0, 0.0, 1.0, 0.0],
        ])

    def g_eval(x, phi):
        return actuation * phi[None, :]

    def dg_dx_cols(x, phi):
        return [np.zeros((5, 5)) for _ in range(4)]

    # Yaw angle and its integral enter the dynamics linearly, so the Jacobians ignore them
    return NonlinearModel("auv5", 5, 4, f_eval, g_eval, df_dx, dg_dx_cols, dt, active_states=[0, 1, 2])


def analytic_kappa_auv2(params: AuvParams, dt: float) -> float:
    """Exact Lipschitz constant of x -> A(x) for auv2"""
    return dt * max(2.0 * params.X_uu / params.m, 2.0 * params.N_rr / params.J_z)


def analytic_kappa_b(params: AuvParams, dt: float, sway: bool = False) -> float:
    """
    Exact Lipschitz constant of (x, phi) -> B for either AUV model

    B does not depend on the state, and inside one fault subproblem only a
    single column is scaled, so the constant is dt times the largest column norm.
    Pass sway=True for auv5, whose input matrix has a sway row.
    """
    rows = [params.surge_row / params.m, params.moment_row / params.J_z]
    if sway:
        rows.insert(1, params.sway_row / params.m)
    return dt * float(np.max(np.linalg.norm(np.vstack(rows), axis=0)))
