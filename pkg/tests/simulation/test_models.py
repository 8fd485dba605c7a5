import pytest

from avi_games.data_structures.enums import SolverName, SolverStatus, WarmStartPadding
from avi_games.simulation.exceptions import InvalidSimulationConfig
from avi_games.simulation.models import RhConfig
from avi_games.solvers.exceptions import InvalidSolverConfig, UnknownSolver
from avi_games.solvers.models import FirstOrderConfig, NewtonConfig


def test_defaults():
    config = RhConfig()
    assert config.horizon_T == 10
    assert config.sim_steps == 300
    assert config.solver == SolverName.NEWTON
    assert config.warm_start
    assert config.padding == WarmStartPadding.ZERO
    assert isinstance(config.solver_config, NewtonConfig)
    assert not config.budget_mode


def test_from_dict_reads_solver_config_of_chosen_solver():
    config = RhConfig.from_dict(
        {"solver": "dr", "solver_config": {"dr_gamma": 0.5}, "padding": "feedback"}
    )
    assert config.solver == SolverName.DR
    assert config.solver_config == FirstOrderConfig(dr_gamma=0.5)
    assert config.padding == WarmStartPadding.FEEDBACK


def test_budget_overrides_solver_config():
    config = RhConfig(solver="fb", iteration_budget=10)
    solver_config = config.effective_solver_config()
    assert solver_config.iteration_budget == 10
    assert solver_config.cap() == (10, SolverStatus.BUDGET_EXHAUSTED)
    assert config.budget_mode


def test_budget_of_solver_config_is_budget_mode():
    assert RhConfig(solver_config=NewtonConfig(iteration_budget=3)).budget_mode


def test_fast_newton_gets_reduced_system():
    config = RhConfig(solver="fast-newton")
    assert config.effective_solver_config().use_reduced_system


@pytest.mark.parametrize(
    "data",
    [
        {"horizon_T": 0},
        {"sim_steps": 0},
        {"iteration_budget": 0},
        {"padding": "tail"},
        {"solver": "simplex"},
        {"horizon": 10},
    ],
)
def test_invalid_config(data):
    with pytest.raises(InvalidSimulationConfig):
        RhConfig.from_dict(data)


def test_solver_config_of_wrong_family():
    with pytest.raises(InvalidSolverConfig):
        RhConfig(solver="fb", solver_config=NewtonConfig())


def test_solver_config_of_unknown_solver():
    with pytest.raises(UnknownSolver):
        RhConfig.from_dict({"solver": "simplex", "solver_config": {}})


def test_config_is_read_from_toml_table(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text(
        '[simulation]\nhorizon_T = 5\nsim_steps = 20\nsolver = "fb"\n'
        "[simulation.solver_config]\ntol = 1e-6\n"
    )
    config = RhConfig.from_file(path)
    assert (config.horizon_T, config.sim_steps, config.solver) == (5, 20, SolverName.FB)
    assert config.solver_config == FirstOrderConfig(tol=1e-6)
