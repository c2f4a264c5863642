"""
Underwater vehicle parameter records.
"""

from typing import List, Optional

import numpy as np

from models.base_model import BaseModel
from models.errors import ConfigurationError


class Thruster(BaseModel):
    """Fixed thruster: mounting angle alpha (rad) and lever arms (m)"""

    _fields = ["alpha", "lx", "ly"]

    def __init__(self, alpha: float, lx: float, ly: float):
        self.alpha = float(alpha)
        self.lx = float(lx)
        self.ly = float(ly)

    @property
    def surge(self) -> float:
        """Force along body x per newton of thrust"""
        return float(np.sin(self.alpha))

    @property
    def sway(self) -> float:
        return float(np.cos(self.alpha))

    @property
    def moment(self) -> float:
        """Yaw moment per newton of thrust, -F_x l_y + F_y l_x"""
        return -self.surge * self.ly + self.sway * self.lx


class AuvParams(BaseModel):
    """Rigid-body and drag coefficients of a hovering AUV"""

    _fields = ["m", "J_z", "X_u", "X_uu", "Y_v", "Y_vv", "N_r", "N_rr", "thrusters", "u_max"]

    def __init__(
        self,
        m: float,
        J_z: float,
        X_u: float,
        X_uu: float,
        N_r: float,
        N_rr: float,
        thrusters: List[Thruster],
        Y_v: float = 0.0,
        Y_vv: float = 0.0,
        u_max: Optional[List[float]] = None
    ):
        if not (m > 0 and J_z > 0):
            raise ConfigurationError(f"mass and yaw inertia must be positive, got m={m}, J_z={J_z}")
        for name, value in (("X_u", X_u), ("X_uu", X_uu), ("Y_v", Y_v), ("Y_vv", Y_vv), ("N_r", N_r), ("N_rr", N_rr)):
            if value < 0:
                raise ConfigurationError(f"drag coefficient {name} must be nonnegative, got {value}")
        self.m = float(m)
        self.J_z = float(J_z)
        self.X_u = float(X_u)
        self.X_uu = float(X_uu)
        self.Y_v = float(Y_v)
        self.Y_vv = float(Y_vv)
        self.N_r = float(N_r)
        self.N_rr = float(N_rr)
        self.thrusters = thrusters
        self.u_max = [38.0] * len(thrusters) if u_max is None else [float(v) for v in u_max]
        if len(self.u_max) != len(thrusters):
            raise ConfigurationError("one saturation threshold per thruster is required")

    @classmethod
    def from_dict(cls, data) -> 'AuvParams':
        data = dict(data)
        data["thrusters"] = [Thruster.from_dict(item) for item in data["thrusters"]]
        return super().from_dict(data)

    @property
    def surge_row(self) -> np.ndarray:
        return np.array([t.surge for t in self.thrusters])

    @property
    def sway_row(self) -> np.ndarray:
        return np.array([t.sway for t in self.thrusters])

    @property
    def moment_row(self) -> np.ndarray:
        return np.array([t.moment for t in self.thrusters])
