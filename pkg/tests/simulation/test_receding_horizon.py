import dataclasses

import numpy as np
import pytest

import avi_games.simulation.receding_horizon as receding_horizon
from avi_games.data_structures.constants import DEFAULT_TOL
from avi_games.data_structures.enums import SolverName, SolverStatus, WarmStartPadding
from avi_games.games.compiler import compile_game, predict_states
from avi_games.games.riccati import solve_riccati
from avi_games.scenarios.loader import bundled_scenario_path, load_scenario
from avi_games.scenarios.models import PlatooningParams
from avi_games.scenarios.platooning import platooning_scenario
from avi_games.simulation.exceptions import SimulationError, SolverFailure
from avi_games.simulation.models import RhConfig
from avi_games.simulation.receding_horizon import run, shift_warm_start, simulate_scenario
from avi_games.simulation.violations import check_violations
from avi_games.solvers.models import NewtonConfig
from avi_games.vi_core.exceptions import NumericalFailure
from tests.helpers import fixed_terminal_riccati, random_game


def two_agent_game(seed: int = 7):
    game = random_game(np.random.default_rng(seed), 2, (1, 1), input_bound=1.0)
    return game, fixed_terminal_riccati(game, [np.eye(2), np.eye(2)])


def test_origin_is_kept():
    game, riccati = two_agent_game()
    log = run(game, riccati, RhConfig(horizon_T=3, sim_steps=10), np.zeros(2))

    assert log.steps == 10
    assert len(log.states) == 11
    np.testing.assert_array_equal(log.state_trajectory, 0.0)
    np.testing.assert_array_equal(log.applied_trajectory, 0.0)
    assert max(log.iterations) <= 2
    assert log.all_converged
    assert check_violations(log, game).is_empty


def test_single_agent_run_follows_lqr_closed_loop():
    rng = np.random.default_rng(9)
    game = random_game(rng, 2, (1,), radius=0.95, input_bound=50.0)
    riccati = solve_riccati(game)
    x0 = rng.standard_normal(2)
    config = RhConfig(horizon_T=5, sim_steps=50, solver_config=NewtonConfig(tol=1e-10))

    log = run(game, riccati, config, x0)

    closed_loop = game.A + game.B_stacked @ riccati.K[0]
    x = x0
    for state in log.states:
        np.testing.assert_allclose(state, x, atol=1e-6)
        x = closed_loop @ x


def test_logged_states_follow_plant():
    game, riccati = two_agent_game()
    log = run(game, riccati, RhConfig(horizon_T=4, sim_steps=20), np.array([3.0, -2.0]))
    for step in range(log.steps):
        expected = game.open_loop_A @ log.states[step] + game.B_stacked @ log.applied_inputs[step]
        np.testing.assert_allclose(log.states[step + 1], expected, rtol=0, atol=1e-12)


def test_runs_are_deterministic():
    game, riccati = two_agent_game()
    config = RhConfig(horizon_T=4, sim_steps=15)
    first = run(game, riccati, config, np.array([3.0, -2.0]))
    second = run(game, riccati, config, np.array([3.0, -2.0]))
    assert first.iterations == second.iterations
    assert first.residual == second.residual
    np.testing.assert_array_equal(first.state_trajectory, second.state_trajectory)


@pytest.mark.parametrize("warm_start", [True, False])
def test_cold_and_warm_start_reach_same_trajectory(warm_start):
    game, riccati = two_agent_game()
    reference = run(game, riccati, RhConfig(horizon_T=4, sim_steps=15), np.array([3.0, -2.0]))
    config = RhConfig(
        horizon_T=4,
        sim_steps=15,
        warm_start=warm_start,
        solver_config=NewtonConfig(tol=1e-9),
    )
    log = run(game, riccati, config, np.array([3.0, -2.0]))
    np.testing.assert_allclose(log.state_trajectory, reference.state_trajectory, atol=1e-3)


def test_budgeted_run_goes_on():
    game, riccati = two_agent_game()
    config = RhConfig(horizon_T=4, sim_steps=5, solver="fb", iteration_budget=1)
    log = run(game, riccati, config, np.array([3.0, -2.0]))
    assert config.budget_mode
    assert log.steps == 5
    assert SolverStatus.BUDGET_EXHAUSTED in log.status


def test_solver_failure_keeps_partial_log(monkeypatch):
    game, riccati = two_agent_game()
    original = receding_horizon.run_solver
    calls = []

    def failing_after_two(*args, **kwargs):
        calls.append(1)
        if len(calls) == 3:
            raise NumericalFailure("singular")
        return original(*args, **kwargs)

    monkeypatch.setattr(receding_horizon, "run_solver", failing_after_two)
    with pytest.raises(SolverFailure) as info:
        run(game, riccati, RhConfig(horizon_T=3, sim_steps=10), np.array([1.0, 1.0]))
    assert info.value.step == 2
    assert info.value.log.steps == 2
    assert len(info.value.log.states) == 3


def test_shift_drops_first_stage_and_pads_with_zero():
    game, riccati = two_agent_game()
    stacked = compile_game(game, 3, riccati)
    u0, lam0 = shift_warm_start(
        stacked, np.array([1.0, 2.0, 3.0, 4.0, 5.0, 6.0]), np.array([0.0, 2.5, 7.0])
    )
    np.testing.assert_array_equal(u0, [2.0, 3.0, 0.0, 5.0, 6.0, 0.0])
    np.testing.assert_array_equal(lam0, [1.0, 1.0, 1.0])


def test_shift_of_zero_sequence_is_cold_start():
    game, riccati = two_agent_game()
    stacked = compile_game(game, 3, riccati)
    u0, lam0 = shift_warm_start(stacked, np.zeros(6), np.zeros(stacked.D.shape[0]))
    np.testing.assert_array_equal(u0, 0.0)
    np.testing.assert_array_equal(lam0, 1.0)


def test_feedback_padding_uses_terminal_gain():
    rng = np.random.default_rng(4)
    game = random_game(rng, 2, (1,), radius=0.9)
    riccati = solve_riccati(game)
    stacked = compile_game(game, 3, riccati)
    prev_u, x0 = rng.standard_normal(3), rng.standard_normal(2)

    u0, _ = shift_warm_start(stacked, prev_u, np.zeros(0), WarmStartPadding.FEEDBACK, x0)

    terminal = predict_states(stacked, x0, prev_u)[-1]
    np.testing.assert_allclose(u0, [prev_u[1], prev_u[2], (riccati.K[0] @ terminal)[0]])


def test_feedback_padding_needs_previous_state():
    game, riccati = two_agent_game()
    stacked = compile_game(game, 2, riccati)
    with pytest.raises(SimulationError):
        shift_warm_start(stacked, np.zeros(4), np.zeros(0), WarmStartPadding.FEEDBACK)


def test_feedback_padding_run():
    game, riccati = two_agent_game()
    riccati = dataclasses.replace(riccati, K=(np.array([[0.1, 0.0]]), np.array([[0.0, 0.1]])))
    config = RhConfig(horizon_T=4, sim_steps=10, padding="feedback")
    log = run(game, riccati, config, np.array([3.0, -2.0]))
    assert log.all_converged


def test_scenario_run_attaches_physical_trajectory():
    scenario = platooning_scenario(PlatooningParams(num_agents=2, velocities=[10.0, 9.0]))
    log = simulate_scenario(scenario, RhConfig(horizon_T=5, sim_steps=8))

    assert log.positions.shape == (9, 2)
    assert log.velocities.shape == (9, 2)
    for step, state in enumerate(log.states):
        np.testing.assert_allclose(
            scenario.error_state(log.positions[step], log.velocities[step]), state, atol=1e-9
        )


def test_first_platooning_steps_keep_input_bounds():
    scenario = load_scenario(bundled_scenario_path("platooning"))
    log = simulate_scenario(scenario, RhConfig(sim_steps=5))

    assert log.all_converged
    assert max(log.violation_max) <= 1e-6
    assert check_violations(log, scenario.game).is_empty


@pytest.mark.slow
def test_platooning_closed_loop_satisfies_constraints():
    scenario = platooning_scenario(
        PlatooningParams(
            positions=[0.0, -12.0, -21.0, -33.0, -41.0],
            velocities=[9.0, 10.0, 10.0, 9.5, 10.0],
        )
    )
    log = simulate_scenario(scenario, RhConfig())

    assert log.steps == 300
    assert log.all_converged
    assert np.median(log.iterations) <= 10
    assert check_violations(log, scenario.game).is_empty
    np.testing.assert_allclose(log.velocities[-1], scenario.v_ref, atol=0.02 * scenario.v_ref)


@pytest.mark.slow
def test_warm_start_does_not_cost_iterations():
    scenario = platooning_scenario(
        PlatooningParams(velocities=[9.0, 10.0, 10.0, 9.5, 10.0])
    )
    warm = simulate_scenario(scenario, RhConfig(sim_steps=100))
    cold = simulate_scenario(scenario, RhConfig(sim_steps=100, warm_start=False))
    assert np.median(warm.iterations) <= np.median(cold.iterations)


@pytest.mark.slow
def test_intersection_closed_loop_without_violations():
    scenario = load_scenario(bundled_scenario_path("intersection"))
    log = simulate_scenario(scenario, RhConfig())

    assert scenario.num_vehicles == 15
    assert log.all_converged
    assert check_violations(log, scenario.game).is_empty
    assert not log.collided


@pytest.mark.slow
def test_budget_of_ten_iterations_on_intersection():
    scenario = load_scenario(bundled_scenario_path("intersection"))
    newton = simulate_scenario(scenario, RhConfig(iteration_budget=10))
    assert check_violations(newton, scenario.game).is_empty

    fb = simulate_scenario(scenario, RhConfig(solver=SolverName.FB, iteration_budget=10))
    inaccurate = np.mean(np.asarray(fb.residual) > 10 * DEFAULT_TOL)
    assert not check_violations(fb, scenario.game).is_empty or inaccurate >= 0.2
