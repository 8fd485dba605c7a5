import numpy as np
import pytest

from avi_games.data_structures.enums import ConstraintClass
from avi_games.scenarios.exceptions import CyclicPrecedence, InvalidParams
from avi_games.scenarios.intersection import (
    build_intersection,
    intersection_dynamics,
    intersection_scenario,
    state_layout,
)
from avi_games.scenarios.models import Arrival, IntersectionParams

TAU = 0.1


def test_two_vehicle_chain_by_hand():
    A, B = intersection_dynamics((None, 0), TAU)
    np.testing.assert_array_equal(A, [[1.0, 0.0, 0.0], [0.0, 1.0, TAU], [0.0, 0.0, 1.0]])
    np.testing.assert_allclose(B[0].ravel(), [-TAU, TAU**2 / 2, TAU])
    np.testing.assert_allclose(B[1].ravel(), [0.0, -(TAU**2) / 2, -TAU])


def test_input_only_moves_own_and_followers_errors():
    predecessor = (None, 0, 1, 0, None)
    offsets, _, _ = state_layout(predecessor)
    _, B = intersection_dynamics(predecessor, TAU)
    sizes = [1, 2, 2, 2, 1]
    for vehicle in range(5):
        followers = {j for j, parent in enumerate(predecessor) if parent == vehicle}
        for j in range(5):
            block = B[vehicle][offsets[j] : offsets[j] + sizes[j], 0]
            if j == vehicle or j in followers:
                assert np.any(block != 0)
            else:
                np.testing.assert_array_equal(block, 0.0)
    assert B[4][offsets[4], 0] == -TAU


def test_predecessor_input_enters_follower_error():
    scenario = intersection_scenario(IntersectionParams(num_agents=3, precedence={1: 0, 2: 1}))
    game = scenario.game
    x = np.random.default_rng(0).standard_normal(game.n)
    baseline = game.step(x, np.zeros(3))
    kicked = game.step(x, np.array([0.0, 1.0, 0.0]))
    follower = slice(scenario.gap_index[2], scenario.gap_index[2] + 2)
    np.testing.assert_allclose((kicked - baseline)[follower], [TAU**2 / 2, TAU], atol=1e-12)


def test_default_scenario_dimensions_and_stability():
    scenario = intersection_scenario(IntersectionParams())
    leaders = len(scenario.leaders)
    assert scenario.num_vehicles == 15
    assert scenario.game.n == leaders + 2 * (15 - leaders)
    assert np.abs(np.linalg.eigvals(scenario.game.A)).max() < 1


def test_explicit_precedence_overrides_arrivals():
    params = IntersectionParams(
        num_agents=3,
        arrivals=(Arrival(0.0, "NS"), Arrival(1.0, "EW"), Arrival(2.0, "SN")),
        precedence={2: 0},
    )
    scenario = intersection_scenario(params)
    assert scenario.predecessor == (None, None, 0)
    assert scenario.game.n == 4


def test_cyclic_precedence_is_rejected():
    with pytest.raises(CyclicPrecedence):
        build_intersection(IntersectionParams(num_agents=3, precedence={0: 2, 1: 0, 2: 1}))


def test_precedence_with_unknown_vehicle():
    with pytest.raises(InvalidParams):
        build_intersection(IntersectionParams(num_agents=2, precedence={3: 0}))


def test_wrong_number_of_arrivals():
    with pytest.raises(InvalidParams):
        IntersectionParams(num_agents=2, arrivals=(Arrival(0.0, "NS"),))


def test_error_coordinates_follow_physical_motion():
    scenario = intersection_scenario(IntersectionParams(num_agents=8))
    game = scenario.game
    applied = np.random.default_rng(1).uniform(-3, 3, (40, 8))
    positions, velocities = scenario.integrate(applied)
    x = scenario.x0
    for u in applied:
        x = game.open_loop_A @ x + game.B_stacked @ u
    np.testing.assert_allclose(scenario.error_state(positions[-1], velocities[-1]), x, atol=1e-10)


def test_gap_rows_measure_distance_to_predecessor():
    scenario = intersection_scenario(IntersectionParams(num_agents=3, precedence={1: 0, 2: 0}))
    positions = np.array([-5.0, -9.0, -30.0])
    velocities = np.array([10.0, 11.0, 7.0])
    spec = scenario.game.constraints
    values = spec.state_values(scenario.error_state(positions, velocities))
    gaps = [
        value for value, label in zip(values, spec.state_labels) if label == ConstraintClass.GAP
    ]
    np.testing.assert_allclose(gaps, [2.0 - 4.0, 2.0 - 25.0], atol=1e-12)


def test_initial_gaps_follow_arrival_times():
    scenario = intersection_scenario(IntersectionParams(num_agents=2, precedence={1: 0}))
    # default arrivals 0.8 s apart at 10 m/s, standoff 5 m
    np.testing.assert_allclose(scenario.x0, [0.0, 8.0 - 5.0, 0.0], atol=1e-12)
