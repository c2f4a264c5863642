import json

import numpy as np
import pytest

from models import CegisConfig, ConfigurationError, ContractViolation, Controller, Trace
from storage import (
    ellipse_boundary,
    load_controller,
    load_trace,
    read_json,
    save_controller,
    save_roa,
    save_trace,
    sibling,
)


def _controller(seed=0):
    rng = np.random.default_rng(seed)
    Q = np.array([[2.0, 0.3], [0.3, 1.0]]) / 3.0
    K = rng.normal(size=(3, 2)) * 1e3
    return Controller(K, rng.normal(size=(3, 2)), np.linalg.inv(Q), Q, [38.0, 38.0, 38.0],
                      certificate={"lambda_star": 1e-4})


def test_controller_round_trip_is_exact(tmp_path):
    controller = _controller()
    path = tmp_path / "nested" / "controller.json"
    save_controller(path, controller, CegisConfig(), {"model": "auv2"})
    loaded, document = load_controller(path)
    for name in ("K", "H", "P", "Q", "u_max"):
        assert np.array_equal(getattr(loaded, name), getattr(controller, name))
    assert loaded.certificate == {"lambda_star": 1e-4}
    assert document["hyperparameters"]["eta"] == 50.0
    assert document["problem"] == {"model": "auv2"}


def test_gain_only_controller_file(tmp_path):
    path = tmp_path / "gain.json"
    path.write_text(json.dumps({"kind": "controller", "controller": {"K": [[-1.0, 0.5]], "u_max": [2.0]}}))
    controller, _ = load_controller(path)
    assert np.array_equal(controller.H, np.zeros((1, 2)))
    assert np.all(np.isnan(controller.P))
    assert np.all(np.isnan(controller.Q))


@pytest.mark.parametrize("document", [
    {"kind": "roa", "controller": {"K": [[1.0]], "u_max": [1.0]}},
    {"kind": "controller", "controller": {"u_max": [1.0]}},
    {"kind": "controller", "controller": {"K": [[1.0, 2.0]], "P": [[1.0]], "u_max": [1.0]}},
    {"kind": "controller", "controller": {"K": [[1.0]], "u_max": [1.0, 2.0]}},
    {"kind": "controller", "controller": {"K": [["a"]], "u_max": [1.0]}},
    [1, 2, 3],
])
def test_load_controller_rejects_bad_documents(tmp_path, document):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(document))
    with pytest.raises(ConfigurationError):
        load_controller(path)


def test_read_json_rejects_malformed_text(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{")
    with pytest.raises(ConfigurationError):
        read_json(path)


def test_ellipse_boundary_lies_on_the_ellipse():
    Q = np.array([[4.0, 1.0], [1.0, 2.0]])
    points = ellipse_boundary(Q)
    assert points.shape == (360, 2)
    values = np.einsum("ij,jk,ik->i", points, np.linalg.inv(Q), points)
    assert np.allclose(values, 1.0)
    with pytest.raises(ContractViolation):
        ellipse_boundary(np.eye(3))


def test_save_roa(tmp_path):
    path = tmp_path / "roa.json"
    save_roa(path, np.ones((3, 2)), np.diag([2.0, 1.0]), {"model": "auv2"}, detuned={"scale": 0.5, "trace_Q": 1.0})
    document = json.loads(path.read_text())
    assert document["kind"] == "roa"
    assert document["trace_Q"] == 3.0
    assert len(document["boundary"]) == 360
    assert document["comparison"]["scale"] == 0.5

    save_roa(path, np.ones((1, 1)), np.eye(1), {})
    assert "boundary" not in json.loads(path.read_text())


def test_save_trace_header(tmp_path):
    count = 4
    trace = Trace(np.arange(count) * 0.1, np.zeros((count, 2)), np.zeros((count, 3)), np.ones((count, 3)),
                  np.zeros((count, 2)), V=np.zeros(count), phase=[0, 0, 1, 1])
    path = tmp_path / "trace.csv"
    save_trace(path, trace)
    frame, metadata = load_trace(path)
    assert metadata["control_law"].startswith("u = sat_umax(K (x - x_ref))")
    assert "problem" not in metadata
    assert list(frame.columns) == ["t", "x1", "x2", "u1", "u2", "u3", "phi1", "phi2", "phi3", "ref1", "ref2", "V",
                                   "phase"]
    assert frame["phase"].tolist() == [0, 0, 1, 1]


def test_sibling():
    assert sibling("output/run.json", "csv").as_posix() == "output/run.csv"


def test_save_trace_echoes_problem_and_scenario(tmp_path):
    count = 3
    trace = Trace(np.arange(count) * 0.1, np.zeros((count, 1)), np.zeros((count, 1)), np.ones((count, 1)),
                  np.zeros((count, 1)))
    problem = {"model": "linear-test", "u_max": [1.0], "description": "scalar # plant"}
    scenario = {"horizon": 0.2, "x0": [0.0]}
    path = tmp_path / "trace.csv"
    save_trace(path, trace, problem, scenario)

    header = [line for line in path.read_text().splitlines() if line.startswith("#")]
    assert [line.split(":")[0] for line in header] == ["# format_version", "# control_law", "# problem", "# scenario"]
    frame, metadata = load_trace(path)
    assert metadata["problem"] == problem
    assert metadata["scenario"] == scenario
    assert metadata["format_version"] == 1
    assert len(frame) == count
    assert frame.columns[0] == "t"
