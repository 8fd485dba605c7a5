import numpy as np
import pytest

from avi_games.data_structures.enums import ScenarioType
from avi_games.scenarios.exceptions import InvalidParams
from avi_games.scenarios.intersection import intersection_scenario
from avi_games.scenarios.loader import ScenarioLoader, bundled_scenario_path, load_scenario
from avi_games.scenarios.models import IntersectionParams
from tests.constants import TEST_DIR

SCENARIOS_DIR = TEST_DIR / "scenarios" / "scenarios_json"


def test_bundled_platooning_scenario():
    scenario = load_scenario(bundled_scenario_path(ScenarioType.PLATOONING))
    assert scenario.kind == ScenarioType.PLATOONING
    assert scenario.num_vehicles == 5
    np.testing.assert_allclose(
        scenario.x0, [0.0, 1.0, 2.0, -1.0, -1.0, 0.0, 2.25, 0.5, -2.0, -0.5], atol=1e-12
    )
    assert scenario.game.constraints.collision_gap == 2.0


def test_bundled_intersection_scenario_uses_default_arrivals():
    scenario = load_scenario(bundled_scenario_path("intersection"))
    default = intersection_scenario(IntersectionParams())
    assert scenario.kind == ScenarioType.INTERSECTION
    assert scenario.predecessor == default.predecessor
    np.testing.assert_allclose(scenario.x0, default.x0)


def test_simulation_block_is_kept_in_document():
    document = ScenarioLoader.read_document(bundled_scenario_path(ScenarioType.PLATOONING))
    assert document["simulation"] == {"horizon_T": 10, "sim_steps": 300}


def test_precedence_keys_are_converted():
    scenario = ScenarioLoader.load(SCENARIOS_DIR / "explicit_precedence.json")
    assert scenario.predecessor == (None, 0, 1)


@pytest.mark.parametrize(
    "file_stem",
    [
        "unknown_key",
        "unknown_type",
        "bad_arrivals",
        "bad_maneuver",
        "not_json",
        "no_type",
        "does_not_exist",
    ],
)
def test_invalid_scenario_files(file_stem):
    with pytest.raises(InvalidParams):
        load_scenario(SCENARIOS_DIR / f"{file_stem}.json")


def test_params_must_be_an_object():
    with pytest.raises(InvalidParams):
        ScenarioLoader.build({"type": "platooning", "params": [1, 2]})
