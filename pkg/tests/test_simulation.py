import numpy as np
import pytest

from models import (
    ConfigurationError,
    ConstantReference,
    Controller,
    ContractViolation,
    DivergenceError,
    FaultPhase,
    FaultSchedule,
    PiecewiseReference,
    SinusoidReference,
    Trace,
)
from services.simulation_service import metrics, simulate

from conftest import scalar_plant


@pytest.fixture
def three_phase():
    return FaultSchedule([
        FaultPhase(0.0, 10.0, [1.0, 1.0, 1.0]),
        FaultPhase(10.0, 20.0, [1.0, 1.0, 0.1]),
        FaultPhase(20.0, 30.0, [1.0, 0.1, 1.0]),
    ])


def _zero_controller(p, n, u_max=38.0):
    return Controller(np.zeros((p, n)), np.zeros((p, n)), np.eye(n), np.eye(n), np.full(p, u_max))


def test_published_gain_tracks_through_partial_faults(auv2_model, published_controller, three_phase):
    trace = simulate(auv2_model, published_controller, three_phase, ConstantReference([0.5, 0.0]), 30.0, np.zeros(2))
    assert len(trace) == 3001
    assert np.all(np.abs(trace.u) <= 38.0)
    assert np.all(np.isfinite(trace.x))

    report = metrics(trace, published_controller.u_max)
    assert [phase["phase"] for phase in report["phases"]] == [0, 1, 2]
    first = report["phases"][0]
    assert first["initial_error"] == pytest.approx(0.5)
    assert first["max_error"] == pytest.approx(0.5)
    for phase in report["phases"]:
        assert phase["final_error"] < 1e-2
        assert phase["steady_state_error"] < 1e-2
    # large initial error keeps the surge thrusters at their bound for a while
    assert first["saturation_duty"][0] > 0.0
    assert report["phases"][1]["phi"] == [1.0, 1.0, 0.1]


def test_phase_boundaries_follow_half_open_intervals(auv2_model, published_controller, three_phase):
    trace = simulate(auv2_model, published_controller, three_phase, ConstantReference([0.5, 0.0]), 30.0, np.zeros(2))
    assert trace.phase[1000] == 0
    assert trace.phase[1001] == 1
    assert np.array_equal(trace.phi[2001], [1.0, 0.1, 1.0])
    assert trace.t[-1] == pytest.approx(30.0)


def test_lyapunov_column_uses_p(auv2_model, published_controller, three_phase):
    trace = simulate(auv2_model, published_controller, three_phase, ConstantReference([0.5, 0.0]), 30.0, np.zeros(2))
    assert np.allclose(trace.V, np.sum(trace.error ** 2, axis=1))

    published_controller.P = np.full((2, 2), np.nan)
    unknown = simulate(auv2_model, published_controller, three_phase, ConstantReference([0.5, 0.0]), 30.0, np.zeros(2))
    assert unknown.V is None
    assert np.all(np.isnan(unknown.to_frame()["V"]))


def test_zero_gain_is_open_loop(auv2_model):
    x0 = np.array([1.0, 0.5])
    trace = simulate(auv2_model, _zero_controller(3, 2), FaultSchedule.nominal(3, 1.0), ConstantReference([0.0, 0.0]),
                     1.0, x0)
    assert np.array_equal(trace.u, np.zeros((101, 3)))
    assert np.allclose(trace.x[1], x0 + auv2_model.dt * auv2_model.f_eval(x0))
    assert np.all(np.diff(trace.x[:, 0]) < 0.0)


def test_divergence_reports_time_index():
    model = scalar_plant(1.5, 0.1)
    with pytest.raises(DivergenceError) as info:
        simulate(model, _zero_controller(1, 1), FaultSchedule.nominal(1, 10.0), ConstantReference([0.0]), 10.0,
                 np.array([1.0]))
    # 1.5^35 is the first power above 1e6
    assert info.value.time_index == 35


def test_simulate_rejects_mismatched_inputs(auv2_model, published_controller):
    with pytest.raises(ContractViolation):
        simulate(auv2_model, _zero_controller(2, 2), FaultSchedule.nominal(3, 1.0), ConstantReference([0.0, 0.0]), 1.0)
    with pytest.raises(ContractViolation):
        simulate(auv2_model, published_controller, FaultSchedule.nominal(3, 1.0), ConstantReference([0.0]), 1.0)


@pytest.mark.parametrize("phases", [
    [FaultPhase(0.0, 5.0, [1.0, 1.0, 1.0]), FaultPhase(6.0, 10.0, [1.0, 1.0, 1.0])],
    [FaultPhase(0.0, 10.0, [0.5, 0.5, 1.0])],
    [FaultPhase(0.0, 10.0, [1.0, 1.2, 1.0])],
    [FaultPhase(1.0, 10.0, [1.0, 1.0, 1.0])],
    [FaultPhase(0.0, 8.0, [1.0, 1.0, 1.0])],
    [FaultPhase(0.0, 10.0, [1.0, 1.0])],
])
def test_schedule_validation(phases):
    with pytest.raises(ConfigurationError):
        FaultSchedule(phases).validate(3, 10.0)


def test_fault_phase_needs_positive_length():
    with pytest.raises(ConfigurationError):
        FaultPhase(2.0, 2.0, [1.0])


def test_references():
    sine = SinusoidReference([0.5, 0.1], [0.1, 0.05], [0.5, 0.0])
    assert np.allclose(sine.at(0.0), [0.5, 0.0])
    assert np.allclose(sine.at(10.0), [0.5 + 0.5 * np.sin(1.0), 0.1 * np.sin(0.5)])
    steps = PiecewiseReference([(5.0, [1.0]), (0.0, [0.0])])
    assert steps.at(0.0) == pytest.approx([0.0])
    assert steps.at(4.99) == pytest.approx([0.0])
    assert steps.at(5.0) == pytest.approx([1.0])
    assert steps.n == 1
    with pytest.raises(ConfigurationError):
        SinusoidReference([1.0], [1.0, 2.0], [0.0])


def _trace(x, u, phases=None):
    count = len(x)
    return Trace(np.arange(count) * 0.1, np.asarray(x, dtype=float), np.asarray(u, dtype=float),
                 np.ones((count, 1)), np.zeros((count, 1)), phase=phases)


def test_metrics_zero_error():
    report = metrics(_trace(np.zeros((10, 1)), np.zeros((10, 1))), np.array([1.0]))
    assert report["max_error"] == 0.0
    assert report["phases"][0]["saturation_duty"] == [0.0]


def test_metrics_constant_error_and_saturation():
    report = metrics(_trace(np.full((20, 1), -2.0), np.ones((20, 1))), np.array([1.0]))
    phase = report["phases"][0]
    assert phase["initial_error"] == phase["max_error"] == phase["final_error"] == phase["steady_state_error"] == 2.0
    assert phase["saturation_duty"] == [1.0]
    assert report["samples"] == 20


def test_metrics_split_by_phase():
    x = np.concatenate([np.full(10, 3.0), np.linspace(1.0, 0.1, 10)])[:, None]
    report = metrics(_trace(x, np.zeros((20, 1)), phases=[0] * 10 + [1] * 10))
    first, second = report["phases"]
    assert first["max_error"] == 3.0
    assert second["initial_error"] == pytest.approx(1.0)
    assert second["final_error"] == pytest.approx(0.1)
    assert second["t_start"] == pytest.approx(1.0)
    assert "saturation_duty" not in second


def test_metrics_reject_empty_trace():
    empty = Trace(np.array([]), np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 1)), np.zeros((0, 1)))
    with pytest.raises(ContractViolation):
        metrics(empty)
