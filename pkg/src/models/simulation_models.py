"""
Closed-loop simulation records: fault schedules, references and traces.
"""

from typing import List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from models.base_model import BaseModel
from models.errors import ConfigurationError

# Phase boundaries are compared with this slack so k * dt lands in the right phase
TIME_SLACK = 1e-9


class FaultPhase(BaseModel):
    """Fault vector applied on (t_start, t_end]"""

    _fields = ["t_start", "t_end", "phi"]
    _array_fields = ["phi"]

    def __init__(self, t_start: float, t_end: float, phi: Sequence[float]):
        self.t_start = float(t_start)
        self.t_end = float(t_end)
        self.phi = np.asarray(phi, dtype=float)
        if not self.t_end > self.t_start:
            raise ConfigurationError(f"fault phase must have t_end > t_start, got ({t_start}, {t_end}]")


class FaultSchedule(BaseModel):
    """Contiguous fault phases starting at t = 0"""

    _fields = ["phases"]

    def __init__(self, phases: List[FaultPhase]):
        if not phases:
            raise ConfigurationError("fault schedule needs at least one phase")
        self.phases = phases

    @classmethod
    def nominal(cls, p: int, horizon: float) -> 'FaultSchedule':
        return cls([FaultPhase(0.0, horizon, np.ones(p))])

    @classmethod
    def from_dict(cls, data) -> 'FaultSchedule':
        return cls([FaultPhase.from_dict(item) for item in data["phases"]])

    def validate(self, p: int, horizon: float) -> None:
        """
        Check that the schedule is admissible for p actuators over [0, horizon]

        Raises:
            ConfigurationError: on gaps, overlaps, short coverage or faults outside Phi
        """
        if abs(self.phases[0].t_start) > TIME_SLACK:
            raise ConfigurationError(f"fault schedule must start at t = 0, starts at {self.phases[0].t_start}")
        for previous, current in zip(self.phases, self.phases[1:]):
            if abs(current.t_start - previous.t_end) > TIME_SLACK:
                raise ConfigurationError(
                    f"fault schedule has a gap or overlap between t = {previous.t_end} and t = {current.t_start}"
                )
        if self.phases[-1].t_end < horizon - TIME_SLACK:
            raise ConfigurationError(f"fault schedule ends at {self.phases[-1].t_end}, before the horizon {horizon}")
        for phase in self.phases:
            phi = phase.phi
            if phi.shape != (p,):
                raise ConfigurationError(f"fault vector {phi.tolist()} does not have {p} entries")
            if np.any(phi < 0.0) or np.any(phi > 1.0):
                raise ConfigurationError(f"fault efficiencies must lie in [0, 1], got {phi.tolist()}")
            if np.count_nonzero(phi < 1.0) > 1:
                raise ConfigurationError(f"at most one actuator may be degraded at a time, got {phi.tolist()}")

    def phase_index(self, t: float) -> int:
        for index, phase in enumerate(self.phases):
            if t <= phase.t_end + TIME_SLACK:
                return index
        return len(self.phases) - 1

    def phi_at(self, t: float) -> np.ndarray:
        return self.phases[self.phase_index(t)].phi


class ReferenceSignal(BaseModel):
    """Reference trajectory x_ref(t)"""

    kind = "base"

    def at(self, t: float) -> np.ndarray:
        raise NotImplementedError

    @property
    def n(self) -> int:
        return self.at(0.0).size


class ConstantReference(ReferenceSignal):
    kind = "constant"
    _fields = ["x_ref"]
    _array_fields = ["x_ref"]

    def __init__(self, x_ref: Sequence[float]):
        self.x_ref = np.asarray(x_ref, dtype=float)

    def at(self, t: float) -> np.ndarray:
        return self.x_ref.copy()


class SinusoidReference(ReferenceSignal):
    """offset + amplitude * sin(frequency * t), per channel, frequency in rad/s"""

    kind = "sinusoid"
    _fields = ["amplitude", "frequency", "offset"]
    _array_fields = ["amplitude", "frequency", "offset"]

    def __init__(self, amplitude: Sequence[float], frequency: Sequence[float], offset: Sequence[float]):
        self.amplitude = np.asarray(amplitude, dtype=float)
        self.frequency = np.asarray(frequency, dtype=float)
        self.offset = np.asarray(offset, dtype=float)
        if not self.amplitude.shape == self.frequency.shape == self.offset.shape:
            raise ConfigurationError("sinusoid amplitude, frequency and offset must have equal length")

    def at(self, t: float) -> np.ndarray:
        return self.offset + self.amplitude * np.sin(self.frequency * t)


class PiecewiseReference(ReferenceSignal):
    """Zero-order hold through (t, x_ref) breakpoints"""

    kind = "piecewise"
    _fields = ["points"]

    def __init__(self, points: List[Tuple[float, Sequence[float]]]):
        if not points:
            raise ConfigurationError("piecewise reference needs at least one breakpoint")
        self.points = sorted(((float(t), np.asarray(x, dtype=float)) for t, x in points), key=lambda item: item[0])
        self._times = np.array([t for t, _ in self.points])

    def at(self, t: float) -> np.ndarray:
        index = int(np.searchsorted(self._times, t + TIME_SLACK, side="right")) - 1
        return self.points[max(index, 0)][1].copy()

    def to_dict(self):
        return {"points": [[t, x.tolist()] for t, x in self.points]}


class Trace(BaseModel):
    """Uniform-grid closed-loop record; row k is time k * dt"""

    _fields = ["t", "x", "u", "phi", "x_ref", "V", "phase"]
    _array_fields = ["t", "x", "u", "phi", "x_ref", "V", "phase"]

    def __init__(
        self,
        t: np.ndarray,
        x: np.ndarray,
        u: np.ndarray,
        phi: np.ndarray,
        x_ref: np.ndarray,
        V: Optional[np.ndarray] = None,
        phase: Optional[np.ndarray] = None
    ):
        self.t = t
        self.x = x
        self.u = u
        self.phi = phi
        self.x_ref = x_ref
        self.V = V
        self.phase = np.zeros(len(t), dtype=int) if phase is None else np.asarray(phase, dtype=int)

    def __len__(self) -> int:
        return len(self.t)

    @property
    def error(self) -> np.ndarray:
        return self.x - self.x_ref

    def to_frame(self) -> pd.DataFrame:
        """Tabular view with columns t, x1..xn, u1..up, phi1..phip, ref1..refn, V, phase"""
        columns = {"t": self.t}
        for label, values in (("x", self.x), ("u", self.u), ("phi", self.phi), ("ref", self.x_ref)):
            for k in range(values.shape[1]):
                columns[f"{label}{k + 1}"] = values[:, k]
        columns["V"] = self.V if self.V is not None else np.full(len(self.t), np.nan)
        columns["phase"] = self.phase
        return pd.DataFrame(columns)
