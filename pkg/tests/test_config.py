import json

import numpy as np
import pytest

from config.problem import ProblemConfig, load_problem_config, load_scenario_config
from models import ConfigurationError, LipschitzBounds
from services.setup_service import build_scenario, build_setup

LINEAR = {
    "model": "linear-test",
    "linear": {"A": [[1.01]], "B": [[0.05, 0.05]], "discrete": True},
    "domain": {"box": {"lower": [-1.0], "upper": [1.0]}},
    "u_max": [1.0, 1.0],
}


def _write(tmp_path, name, data):
    path = tmp_path / name
    path.write_text(json.dumps(data) if not isinstance(data, str) else data)
    return path


@pytest.mark.parametrize("name", ["auv2.json", "auv5.json", "linear_test.json"])
def test_shipped_problem_files_load(root_dir, name):
    problem = load_problem_config(root_dir / "configs" / name)
    setup = build_setup(problem, threads=1)
    assert setup.model.n == problem.n
    assert setup.box.p == problem.p
    assert setup.config.verifier.threads == 1


@pytest.mark.parametrize("name", ["auv2_three_phase.json", "auv2_sine.json", "auv2_total_fault.json"])
def test_shipped_auv2_scenarios_build(root_dir, name):
    schedule, reference, horizon, x0 = build_scenario(load_scenario_config(root_dir / "scenarios" / name), 3, 2)
    assert reference.n == 2
    assert schedule.phases[-1].t_end >= horizon


def test_shipped_auv5_scenario_builds(root_dir):
    scenario = load_scenario_config(root_dir / "scenarios" / "auv5_sine_corner.json")
    schedule, reference, horizon, x0 = build_scenario(scenario, 4, 5)
    assert np.array_equal(x0, np.full(5, 2.0))
    assert reference.at(0.0)[3] == pytest.approx(0.2)


def test_defaults_filled_in():
    problem = ProblemConfig.model_validate(LINEAR)
    assert problem.hyperparameters.eta == 50.0
    assert problem.hyperparameters.tau == 0.999
    assert problem.verifier.lipschitz_scale == "eta"
    assert problem.n == 1 and problem.p == 2


@pytest.mark.parametrize("patch", [
    {"unknown_key": 1},
    {"u_max": [1.0, 0.0]},
    {"u_max": [1.0]},
    {"hyperparameters": {"eta": 1e-5, "epsilon": 1e-4}},
    {"hyperparameters": {"tau": 1.5}},
    {"domain": {"box": {"lower": [0.5], "upper": [1.0]}}},
    {"domain": {"box": {"lower": [-1.0, -1.0], "upper": [1.0, 1.0]}}},
    {"model": "auv2"},
    {"verifier": {"lipschitz_scale": "loose"}},
    {"initial_sample": {"x": [0.0], "phi": [1.0]}},
])
def test_invalid_problem_rejected(tmp_path, patch):
    path = _write(tmp_path, "problem.json", dict(LINEAR, **patch))
    with pytest.raises(ConfigurationError):
        load_problem_config(path)


def test_auv5_has_no_closed_form_constants(root_dir, tmp_path):
    data = json.loads((root_dir / "configs" / "auv5.json").read_text())
    data["lipschitz"] = {"analytic": True}
    with pytest.raises(ConfigurationError):
        load_problem_config(_write(tmp_path, "auv5.json", data))


def test_malformed_json_rejected(tmp_path):
    with pytest.raises(ConfigurationError):
        load_problem_config(_write(tmp_path, "broken.json", "{\"model\": "))


def test_missing_file_is_an_os_error(tmp_path):
    with pytest.raises(OSError):
        load_problem_config(tmp_path / "absent.json")


def test_closed_form_lipschitz_for_linear_plant():
    setup = build_setup(ProblemConfig.model_validate(dict(LINEAR, lipschitz={"analytic": True})))
    bounds = setup.lipschitz()
    assert bounds.certified is True
    assert bounds.kappa_A == 0.0
    assert bounds.kappa_B == pytest.approx(0.05)
    assert bounds.state_kappa_B == 0.0
    assert setup.lipschitz() is bounds


def test_explicit_and_sampled_lipschitz():
    explicit = build_setup(ProblemConfig.model_validate(dict(LINEAR, lipschitz={"kappa_A": 0.1, "kappa_B": 0.2})))
    assert (explicit.lipschitz().kappa_A, explicit.lipschitz().certified) == (0.1, True)

    sampled = build_setup(ProblemConfig.model_validate(dict(LINEAR, lipschitz={"samples": 20})))
    bounds = sampled.lipschitz()
    assert bounds.certified is False
    assert bounds.provenance == "estimate-based"
    assert bounds.kappa_A == 0.0


def test_lipschitz_bounds_validation():
    with pytest.raises(ConfigurationError):
        LipschitzBounds(-1.0, 0.0, certified=True)
    with pytest.raises(ConfigurationError):
        LipschitzBounds(0.0, 0.1, certified=True, kappa_B_state=0.2)


def test_scenario_dimension_mismatch(tmp_path):
    scenario = {
        "horizon": 5.0,
        "x0": [0.0],
        "reference": {"kind": "constant", "x_ref": [0.5, 0.0]},
        "faults": [{"t_start": 0.0, "t_end": 5.0, "phi": [1.0, 1.0, 1.0]}],
    }
    with pytest.raises(ConfigurationError):
        build_scenario(load_scenario_config(_write(tmp_path, "scenario.json", scenario)), 3, 2)


def test_scenario_reference_kinds(tmp_path):
    scenario = {
        "horizon": 5.0,
        "reference": {"kind": "piecewise", "points": [[0.0, [0.0, 0.0]], [2.0, [0.5, 0.0]]]},
        "faults": [{"t_start": 0.0, "t_end": 5.0, "phi": [1.0, 1.0, 1.0]}],
    }
    _, reference, _, x0 = build_scenario(load_scenario_config(_write(tmp_path, "scenario.json", scenario)), 3, 2)
    assert x0 is None
    assert reference.at(3.0) == pytest.approx([0.5, 0.0])

    scenario["reference"] = {"kind": "ramp", "slope": [1.0]}
    with pytest.raises(ConfigurationError):
        load_scenario_config(_write(tmp_path, "bad.json", scenario))


def test_shipped_auv5_three_phase_scenario(root_dir):
    scenario = load_scenario_config(root_dir / "scenarios" / "auv5_three_phase.json")
    schedule, reference, horizon, x0 = build_scenario(scenario, 4, 5)
    assert len(schedule.phases) == 3
    assert np.array_equal(reference.at(25.0), [0.5, 0.0, 0.0, 0.2, 0.0])
