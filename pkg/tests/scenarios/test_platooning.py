import numpy as np
import pytest

from avi_games.data_structures.enums import ConstraintClass
from avi_games.scenarios.exceptions import InvalidParams
from avi_games.scenarios.models import PlatooningParams
from avi_games.scenarios.platooning import (
    build_platooning,
    platooning_dynamics,
    platooning_scenario,
)

TAU = 0.1


def test_two_vehicle_input_matrices():
    A, B = platooning_dynamics(PlatooningParams(num_agents=2, headway=0.5))
    np.testing.assert_allclose(B[0].ravel(), [0.0, -TAU, TAU**2 / 2, TAU])
    np.testing.assert_allclose(B[1].ravel(), [0.0, 0.0, -(0.5 * TAU + TAU**2 / 2), -TAU])
    np.testing.assert_array_equal(A[:2, :2], [[0.0, 0.0], [0.0, 1.0]])
    np.testing.assert_array_equal(A[2:, 2:], [[1.0, TAU], [0.0, 1.0]])
    np.testing.assert_array_equal(A[:2, 2:], 0.0)


def test_game_keeps_open_loop_dynamics_and_weights():
    params = PlatooningParams(num_agents=4)
    scenario = platooning_scenario(params)
    A, B = platooning_dynamics(params)
    np.testing.assert_allclose(scenario.game.open_loop_A, A, atol=1e-15)
    for left, right in zip(scenario.game.B, B):
        np.testing.assert_array_equal(left, right)
    assert scenario.game.n == 8
    assert scenario.game.input_dims == (1, 1, 1, 1)
    np.testing.assert_array_equal(scenario.game.Q[2], np.eye(8))
    np.testing.assert_array_equal(scenario.game.R[2], [[1.0]])


def test_leader_position_slot_stays_zero():
    scenario = platooning_scenario(PlatooningParams(num_agents=3))
    rng = np.random.default_rng(0)
    x = rng.standard_normal(6)
    x[0] = 0.0
    assert scenario.game.step(x, rng.standard_normal(3))[0] == 0.0


def test_desired_spacing_is_an_equilibrium():
    game, x0 = build_platooning(PlatooningParams())
    np.testing.assert_allclose(x0, 0.0, atol=1e-12)
    np.testing.assert_array_equal(game.step(x0, np.zeros(game.num_agents)), 0.0)


@pytest.mark.parametrize("num_agents", [2, 5, 10])
def test_prestabilized_dynamics_are_schur_stable(num_agents):
    game, _ = build_platooning(PlatooningParams(num_agents=num_agents))
    assert np.abs(np.linalg.eigvals(game.A)).max() < 1
    assert np.abs(np.linalg.eigvals(game.open_loop_A)).max() >= 1


def test_error_coordinates_follow_physical_motion():
    params = PlatooningParams(
        positions=[0.0, -12.0, -21.0, -33.0, -41.0],
        velocities=[9.0, 10.0, 10.0, 9.5, 10.0],
        headway=[0.5, 0.4, 0.5, 0.6, 0.5],
    )
    scenario = platooning_scenario(params)
    game = scenario.game
    rng = np.random.default_rng(1)
    applied = rng.uniform(-3, 3, (50, 5))
    positions, velocities = scenario.integrate(applied)

    x = scenario.x0
    for t, u in enumerate(applied):
        np.testing.assert_allclose(
            scenario.error_state(positions[t], velocities[t]), x, atol=1e-10
        )
        x = game.open_loop_A @ x + game.B_stacked @ u
    np.testing.assert_allclose(scenario.error_state(positions[-1], velocities[-1]), x, atol=1e-10)


def test_bundled_initial_condition_errors():
    scenario = platooning_scenario(
        PlatooningParams(
            positions=[0.0, -12.0, -21.0, -33.0, -41.0],
            velocities=[9.0, 10.0, 10.0, 9.5, 10.0],
        )
    )
    np.testing.assert_allclose(
        scenario.x0, [0.0, 1.0, 2.0, -1.0, -1.0, 0.0, 2.25, 0.5, -2.0, -0.5], atol=1e-12
    )


def test_state_rows_measure_gaps_and_velocities():
    params = PlatooningParams(num_agents=3, d_min=2.0, v_bounds=(0.0, 15.0))
    scenario = platooning_scenario(params)
    positions = np.array([0.0, -7.0, -20.0])
    velocities = np.array([12.0, 8.0, 11.0])
    x = scenario.error_state(positions, velocities)

    spec = scenario.game.constraints
    values = spec.state_values(x)
    assert spec.state_labels == (ConstraintClass.GAP,) * 2 + (ConstraintClass.VELOCITY,) * 6
    np.testing.assert_allclose(values[:2], [2.0 - 7.0, 2.0 - 13.0], atol=1e-12)
    np.testing.assert_allclose(
        values[2:], [-3.0, -12.0, -7.0, -8.0, -4.0, -11.0], atol=1e-12
    )
    np.testing.assert_allclose(scenario.velocities_of(x), velocities, atol=1e-12)
    assert spec.collision_gap == 2.0


def test_input_rows_bound_applied_acceleration():
    scenario = platooning_scenario(PlatooningParams(num_agents=3, u_bounds=(-2.0, 1.0)))
    game = scenario.game
    rng = np.random.default_rng(2)
    x, u = rng.standard_normal(6), rng.standard_normal(3)
    applied = game.applied_inputs(x, u)
    np.testing.assert_allclose(
        game.constraints.input_values(x, u), np.concatenate([applied - 1.0, -2.0 - applied])
    )


def test_to_physical_inverts_error_state():
    scenario = platooning_scenario(PlatooningParams(num_agents=4))
    rng = np.random.default_rng(3)
    positions = -np.cumsum(rng.uniform(5, 15, 4))
    velocities = rng.uniform(5, 12, 4)
    x = scenario.error_state(positions, velocities)
    leader_only = np.array([positions[0], np.nan, np.nan, np.nan])
    restored_positions, restored_velocities = scenario.to_physical(x, leader_only)
    np.testing.assert_allclose(restored_positions, positions, atol=1e-10)
    np.testing.assert_allclose(restored_velocities, velocities, atol=1e-10)


@pytest.mark.parametrize(
    "kwargs",
    [
        {"num_agents": 1},
        {"tau_s": 0.0},
        {"d_min": -1.0},
        {"v_ref": 20.0},
        {"u_bounds": (0.5, 3.0)},
        {"v_bounds": (0.0, 5.0, 10.0)},
        {"headway": [0.5, 0.5]},
        {"positions": [0.0, -10.0]},
    ],
)
def test_invalid_params(kwargs):
    with pytest.raises(InvalidParams):
        PlatooningParams(**kwargs)
