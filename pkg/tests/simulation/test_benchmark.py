import numpy as np
import pytest

from avi_games.data_structures.enums import SolverName, SolverStatus
from avi_games.games.compiler import compile_game
from avi_games.games.riccati import solve_riccati
from avi_games.scenarios.loader import bundled_scenario_path, load_scenario
from avi_games.simulation.benchmark import (
    BenchRecord,
    load_bench_csv,
    markdown_summary,
    run_benchmark,
    write_bench_csv,
)
from avi_games.simulation.exceptions import SimulationError
from avi_games.simulation.models import RhConfig
from avi_games.simulation.receding_horizon import run, simulate_scenario
from tests.helpers import fixed_terminal_riccati, random_game


@pytest.fixture
def instance():
    game = random_game(np.random.default_rng(7), 2, (1, 1), input_bound=1.0)
    riccati = fixed_terminal_riccati(game, [np.eye(2), np.eye(2)])
    config = RhConfig(horizon_T=4, sim_steps=12)
    stacked = compile_game(game, config.horizon_T, riccati)
    log = run(game, riccati, config, np.array([3.0, -2.0]), stacked=stacked)
    return stacked, log.states[:-1], config


def test_newton_variants_take_identical_iterations(instance):
    stacked, states, config = instance
    records = run_benchmark(stacked, states, ["newton", "fast-newton"], config)

    newton = [record.iterations for record in records if record.solver == "newton"]
    fast = [record.iterations for record in records if record.solver == "fast-newton"]
    assert len(newton) == len(states)
    assert newton == fast


def test_repetitions_repeat_iteration_counts(instance):
    stacked, states, config = instance
    records = run_benchmark(stacked, states, [SolverName.DR], config, repetitions=2)

    first = [record.iterations for record in records if record.repetition == 0]
    second = [record.iterations for record in records if record.repetition == 1]
    assert first == second


def test_budget_applies_to_every_solver(instance):
    stacked, states, _ = instance
    records = run_benchmark(stacked, states, ["fb"], RhConfig(iteration_budget=2))
    assert SolverStatus.BUDGET_EXHAUSTED in {record.status for record in records}


@pytest.mark.parametrize("solvers, repetitions", [([], 1), (["newton"], 0)])
def test_invalid_benchmark(instance, solvers, repetitions):
    stacked, states, config = instance
    with pytest.raises(SimulationError):
        run_benchmark(stacked, states, solvers, config, repetitions=repetitions)


def test_bench_file_round_trip(tmp_path):
    records = [
        BenchRecord(0, 0, "newton", 3, 0.002, 1e-6, SolverStatus.CONVERGED),
        BenchRecord(0, 1, "fb", 10, 0.001, 0.25, SolverStatus.BUDGET_EXHAUSTED),
    ]
    path = tmp_path / "bench.csv"
    write_bench_csv(records, path)
    assert load_bench_csv(path) == records


def test_markdown_summary():
    records = [
        BenchRecord(0, step, "newton", 2 + step, 0.001, 0.0, SolverStatus.CONVERGED)
        for step in range(3)
    ] + [BenchRecord(0, 0, "dr", 40, 0.004, 0.0, SolverStatus.MAX_ITERATIONS)]

    lines = markdown_summary(records).splitlines()

    assert lines[0].startswith("| solver |")
    assert lines[2] == "| newton | 3 | 3.0 | 1.000 | 3/3 |"
    assert lines[3] == "| dr | 1 | 40.0 | 4.000 | 0/1 |"


def _median_iterations(records, solver):
    return np.median([record.iterations for record in records if record.solver == solver])


@pytest.mark.slow
def test_first_order_solvers_need_more_iterations_on_platooning():
    scenario = load_scenario(bundled_scenario_path("platooning"))
    config = RhConfig(sim_steps=60)
    log = simulate_scenario(scenario, config)
    stacked = compile_game(scenario.game, config.horizon_T, solve_riccati(scenario.game))

    records = run_benchmark(stacked, log.states[:-1], ["newton", "fb", "dr"], config)

    newton = _median_iterations(records, "newton")
    assert _median_iterations(records, "fb") >= 5 * newton
    assert _median_iterations(records, "dr") >= 2 * newton


@pytest.mark.slow
def test_fast_newton_matches_newton_on_intersection():
    scenario = load_scenario(bundled_scenario_path("intersection"))
    config = RhConfig()
    log = simulate_scenario(scenario, config)
    stacked = compile_game(scenario.game, config.horizon_T, solve_riccati(scenario.game))

    records = run_benchmark(
        stacked, log.states[:-1], ["newton", "fast-newton"], config, repetitions=3
    )

    def per_step(solver, field):
        rows = [record for record in records if record.solver == solver]
        values = np.full((3, len(log.states) - 1), np.nan)
        for record in rows:
            values[record.repetition, record.step] = getattr(record, field)
        return values

    np.testing.assert_array_equal(
        per_step("newton", "iterations"), per_step("fast-newton", "iterations")
    )
    fastest_full = per_step("newton", "elapsed_s").min(axis=0)
    fastest_reduced = per_step("fast-newton", "elapsed_s").min(axis=0)
    assert np.median(fastest_reduced) <= np.median(fastest_full)
