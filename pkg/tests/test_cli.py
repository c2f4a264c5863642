import importlib
import json

import numpy as np
import pytest

from handlers.error_handlers import exit_code_for
from main import main
from models import (
    ConfigurationError,
    DivergenceError,
    EvaluationError,
    ExtractionError,
    InfeasibleError,
    SolverFailure,
    StallError,
    UndecidedError,
)
from services.cegis_service import cegis_service
from storage import load_trace
from storage.report_operations import CONTROL_LAW

# the package re-exports the singleton under the module's name
cegis_module = importlib.import_module("services.cegis_service")


def _problem(tmp_path, a, b=0.1):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps({
        "model": "linear-test",
        "linear": {"A": [[a]], "B": [[b]], "discrete": True},
        "domain": {"box": {"lower": [-1.0], "upper": [1.0]}},
        "u_max": [1.0],
        "hyperparameters": {"max_iterations": 5},
        "lipschitz": {"analytic": True},
        "verifier": {"lipschitz_scale": "candidate", "max_evaluations": 200000},
    }))
    return str(path)


def _controller(tmp_path, K, **extra):
    path = tmp_path / "controller.json"
    path.write_text(json.dumps({"kind": "controller", "controller": dict({"K": K, "u_max": [1.0]}, **extra)}))
    return str(path)


def _scenario(tmp_path, x0=1.0):
    path = tmp_path / "scenario.json"
    path.write_text(json.dumps({
        "horizon": 10.0,
        "x0": [x0],
        "reference": {"kind": "constant", "x_ref": [0.0]},
        "faults": [{"t_start": 0.0, "t_end": 10.0, "phi": [1.0]}],
    }))
    return str(path)


def test_synth_writes_controller_and_report(tmp_path):
    out = tmp_path / "out" / "controller.json"
    dump = tmp_path / "out" / "first.sdp"
    code = main(["synth", "--config", _problem(tmp_path, 0.5), "--out", str(out), "--threads", "1",
                 "--dump-sdp", str(dump)])
    assert code == 0
    document = json.loads(out.read_text())
    assert document["kind"] == "controller"
    assert document["lipschitz"]["provenance"] == "analytic"
    report = json.loads((tmp_path / "out" / "controller.report.json").read_text())
    assert report["outcome"]["kind"] == "converged"
    assert dump.read_text().startswith("#")


def test_synth_rejects_malformed_problem(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text("{\"model\": \"linear-test\"")
    assert main(["synth", "--config", str(path), "--out", str(tmp_path / "c.json")]) == 1


def test_missing_problem_file(tmp_path):
    assert main(["synth", "--config", str(tmp_path / "absent.json"), "--out", str(tmp_path / "c.json")]) == 1


def test_verify_rejects_wrong_gain_shape(tmp_path):
    code = main(["verify", "--config", _problem(tmp_path, 0.5), "--controller", _controller(tmp_path, [[1.0, 2.0]])])
    assert code == 1


def test_verify_needs_an_ellipsoid(tmp_path):
    code = main(["verify", "--config", _problem(tmp_path, 0.5), "--controller", _controller(tmp_path, [[-1.0]])])
    assert code == 1


def test_verify_destabilizing_gain_gives_counterexample(tmp_path):
    controller = _controller(tmp_path, [[5.0]], H=[[5.0]], P=[[1.0]], Q=[[1.0]])
    out = tmp_path / "verification.json"
    code = main(["verify", "--config", _problem(tmp_path, 1.05), "--controller", controller, "--out", str(out),
                 "--threads", "1"])
    assert code == 2
    result = json.loads(out.read_text())["result"]
    assert result["lambda_value"] <= 0.0


def test_simulate_writes_trace_and_metrics(tmp_path):
    out = tmp_path / "trace.csv"
    code = main(["simulate", "--config", _problem(tmp_path, 0.5), "--controller", _controller(tmp_path, [[0.0]]),
                 "--scenario", _scenario(tmp_path), "--out", str(out)])
    assert code == 0
    frame, metadata = load_trace(out)
    assert len(frame) == 1001
    assert metadata["control_law"] == CONTROL_LAW
    assert metadata["problem"]["model"] == "linear-test"
    assert metadata["scenario"]["horizon"] == 10.0
    assert frame["x1"].iloc[-1] < 1e-6
    document = json.loads((tmp_path / "trace.metrics.json").read_text())
    assert "control_law" in document
    assert document["metrics"]["phases"][0]["initial_error"] == 1.0


def test_simulate_divergence_exit_code(tmp_path):
    code = main(["simulate", "--config", _problem(tmp_path, 1.5), "--controller", _controller(tmp_path, [[0.0]]),
                 "--scenario", _scenario(tmp_path), "--out", str(tmp_path / "trace.csv")])
    assert code == 4


def test_usage_errors_exit_one():
    with pytest.raises(SystemExit) as info:
        main(["synth"])
    assert info.value.code == 1
    with pytest.raises(SystemExit) as info:
        main(["train", "--config", "x.json"])
    assert info.value.code == 1


@pytest.mark.parametrize("error, code", [
    (InfeasibleError("no Q", iteration=2), 2),
    (UndecidedError("budget", gap=-1e-3), 3),
    (StallError("repeat"), 3),
    (SolverFailure("numerical"), 3),
    (ExtractionError("singular Q"), 3),
    (DivergenceError("blow-up", time_index=7), 4),
    (ConfigurationError("bad"), 1),
    (EvaluationError("nan"), 1),
    (FileNotFoundError(2, "No such file", "x.json"), 1),
])
def test_exit_code_for(error, code):
    assert exit_code_for(error) == code


def test_roa_with_comparison(tmp_path):
    out = tmp_path / "roa.json"
    code = main(["roa", "--config", _problem(tmp_path, 0.5), "--controller", _controller(tmp_path, [[-1.0]]),
                 "--out", str(out), "--threads", "1", "--compare-scale", "0.5"])
    assert code == 0
    document = json.loads(out.read_text())
    assert document["trace_Q"] == pytest.approx(1.0, abs=1e-5)
    assert document["comparison"]["scale"] == 0.5
    assert document["trace_Q"] >= document["comparison"]["trace_Q"] - 1e-6
    assert "boundary" not in document


class BrokenSolver:
    def solve_sdp(self, problem, tol):
        raise SolverFailure("backend returned NaN")


def test_synth_solver_failure_keeps_partial_report(tmp_path, monkeypatch):
    monkeypatch.setattr(cegis_service, "solver", BrokenSolver())
    out = tmp_path / "controller.json"
    code = main(["synth", "--config", _problem(tmp_path, 0.5), "--out", str(out), "--threads", "1"])
    assert code == 3
    assert not out.exists()
    report = json.loads((tmp_path / "controller.report.json").read_text())
    assert report["outcome"]["kind"] == "undecided"
    assert report["outcome"]["iterations"] == 1
    assert report["outcome"]["samples"] == 1
    assert "backend returned NaN" in report["outcome"]["message"]


def test_synth_extraction_failure_keeps_partial_report(tmp_path, monkeypatch):
    def refuse(solution, box):
        raise ExtractionError(f"Q is near-singular (min eigenvalue {np.linalg.eigvalsh(solution.Q)[0]:.3e})")

    monkeypatch.setattr(cegis_module, "extract_controller", refuse)
    out = tmp_path / "controller.json"
    code = main(["synth", "--config", _problem(tmp_path, 0.5), "--out", str(out), "--threads", "1"])
    assert code == 3
    assert not out.exists()
    report = json.loads((tmp_path / "controller.report.json").read_text())
    assert report["outcome"]["message"].startswith("learner failure")
    assert len(report["history"]) == 1
    assert report["history"][0]["lambda_star"] > 0.0
