"""Implementations of the ``avi-games`` subcommands. Each returns an ``ExitCode``.

Errors that make a command fail as a whole (unreadable input, solver breakdowns) are raised
and mapped to exit codes by ``avi_games.main``.
"""

import dataclasses
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path
from typing import Any

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.cli.exceptions import UsageError
from avi_games.cli.output import write_report
from avi_games.data_structures.enums import ExitCode, OutputFormat, SolverStatus
from avi_games.data_structures.models import Vector, as_vector
from avi_games.games.compiler import compile_game
from avi_games.games.exceptions import InvalidGame
from avi_games.games.models import LqGame
from avi_games.games.riccati import solve_riccati
from avi_games.games.serialization import game_from_dict, save_game
from avi_games.scenarios.loader import ScenarioLoader
from avi_games.scenarios.models import Scenario
from avi_games.simulation.benchmark import markdown_summary, run_benchmark, write_bench_csv
from avi_games.simulation.exceptions import SolverFailure
from avi_games.simulation.export import summarize, write_metrics, write_summary, write_trajectory
from avi_games.simulation.models import RhConfig, RhLog
from avi_games.simulation.receding_horizon import attach_physical, run
from avi_games.simulation.violations import check_violations
from avi_games.solvers.registry import SolverConfig, default_config, get_solver, run_solver
from avi_games.vi_core.serialization import load_problem, save_problem

logger = logging.getLogger(__name__)

METRICS_FILE = "metrics.csv"
TRAJECTORY_FILE = "trajectory.csv"
SUMMARY_FILE = "summary.json"
AVI_FILE = "avi.json"
GAME_FILE = "game.json"
BENCH_FILE = "bench.csv"
BENCH_SUMMARY_FILE = "bench.md"

SOLVER_EXIT_CODES = {
    SolverStatus.CONVERGED: ExitCode.OK,
    SolverStatus.MAX_ITERATIONS: ExitCode.NOT_CONVERGED,
    SolverStatus.BUDGET_EXHAUSTED: ExitCode.NOT_CONVERGED,
    SolverStatus.NUMERICAL_FAILURE: ExitCode.NUMERICAL_FAILURE,
}


@dataclass(frozen=True)
class Overrides:
    """Command-line values that replace those of config files and defaults."""

    tol: float | None = None
    max_iter: int | None = None
    budget: int | None = None
    seed: int | None = None
    horizon: int | None = None
    steps: int | None = None

    def solver_config(self, solver: str, base: SolverConfig | None = None) -> SolverConfig:
        config = base if base is not None else default_config(solver)
        changes: dict[str, Any] = {
            "tol": self.tol,
            "max_iter": self.max_iter,
            "iteration_budget": self.budget,
            "seed": self.seed,
        }
        return dataclasses.replace(
            config, **{key: value for key, value in changes.items() if value is not None}
        )

    def rh_config(self, base: RhConfig, solver: str | None) -> RhConfig:
        solver = solver or base.solver
        base_solver_config = base.solver_config
        if not isinstance(base_solver_config, get_solver(solver).config_type):
            base_solver_config = None
        return dataclasses.replace(
            base,
            solver=solver,
            solver_config=self.solver_config(solver, base_solver_config),
            horizon_T=self.horizon or base.horizon_T,
            sim_steps=self.steps or base.sim_steps,
            iteration_budget=self.budget or base.iteration_budget,
        )


@dataclass(frozen=True, eq=False)
class ClosedLoopInput:
    """A game with its initial state, built from a scenario file or a game file."""

    game: LqGame
    x0: Vector
    config: RhConfig
    scenario: Scenario | None = None


def read_closed_loop_input(path: Path) -> ClosedLoopInput:
    """Scenario documents carry a ``type``; anything else is read as a game document with an
    optional ``x0`` (zeros by default). Both may hold a ``simulation`` block.
    """
    document = ScenarioLoader.read_document(path)
    config = RhConfig.from_dict(document.get("simulation", {}))
    if "type" in document:
        scenario = ScenarioLoader.build(document)
        return ClosedLoopInput(scenario.game, scenario.x0, config, scenario)

    game = game_from_dict(document)
    try:
        x0 = as_vector(document.get("x0", np.zeros(game.n)), "x0")
    except ValueError as err:
        raise InvalidGame(str(err)) from err
    if x0.shape != (game.n,):
        raise InvalidGame(f"x0 has {x0.shape[0]} entries, the game has n={game.n}")
    return ClosedLoopInput(game, x0, config)


def cmd_solve(
    path: Path,
    solver: str,
    overrides: Overrides,
    out_dir: Path,
    output_format: OutputFormat = OutputFormat.JSON,
) -> ExitCode:
    problem = load_problem(path)
    report = run_solver(solver, problem, overrides.solver_config(solver))
    write_report(report, out_dir, output_format)

    solution = np.array2string(report.solution, precision=6) if problem.n <= 10 else "..."
    print(
        f"{report.solver}: {report.status.value} after {report.iterations} iterations, "
        f"residual {report.residual:.3e}, {report.elapsed:.4f} s, u* = {solution}"
    )
    return SOLVER_EXIT_CODES[report.status]


def cmd_compile(path: Path, overrides: Overrides, out_dir: Path) -> ExitCode:
    """Writes the AVI at the initial state and the (pre-stabilized) game."""
    closed_loop = read_closed_loop_input(path)
    horizon = overrides.horizon or closed_loop.config.horizon_T
    riccati = solve_riccati(closed_loop.game)
    stacked = compile_game(closed_loop.game, horizon, riccati)

    out_dir.mkdir(parents=True, exist_ok=True)
    save_problem(stacked.problem_at(closed_loop.x0), out_dir / AVI_FILE)
    save_game(closed_loop.game, out_dir / GAME_FILE)
    print(
        f"Compiled {closed_loop.game.num_agents} agents over {horizon} stages: "
        f"{stacked.num_variables} variables, {stacked.D.shape[0]} constraint rows, "
        f"closed-loop spectral radius {riccati.spectral_radius:.4f}"
    )
    return ExitCode.OK


def _write_run(log: RhLog, closed_loop: ClosedLoopInput, out_dir: Path) -> bool:
    """Writes metrics, trajectory and summary. Returns whether the run had no violations."""
    if closed_loop.scenario is not None:
        attach_physical(log, closed_loop.scenario)
    report = check_violations(log, closed_loop.game)
    out_dir.mkdir(parents=True, exist_ok=True)
    write_metrics(log, out_dir / METRICS_FILE)
    write_trajectory(log, out_dir / TRAJECTORY_FILE)
    write_summary([summarize(log, report)], out_dir / SUMMARY_FILE)
    return report.is_empty


def cmd_simulate(
    path: Path, solver: str | None, overrides: Overrides, out_dir: Path
) -> ExitCode:
    closed_loop = read_closed_loop_input(path)
    config = overrides.rh_config(closed_loop.config, solver)
    riccati = solve_riccati(closed_loop.game)

    try:
        log = run(closed_loop.game, riccati, config, closed_loop.x0)
    except SolverFailure as err:
        _write_run(err.log, closed_loop, out_dir)
        raise

    feasible = _write_run(log, closed_loop, out_dir)
    print(
        f"{log.solver}: {log.steps} steps, median {np.median(log.iterations):.1f} iterations, "
        f"collision: {'yes' if log.collided else 'no'}, "
        f"violations: {'none' if feasible else 'see ' + SUMMARY_FILE}"
    )
    if config.budget_mode:
        return ExitCode.OK
    if not feasible:
        return ExitCode.VIOLATIONS
    if not log.all_converged:
        return ExitCode.NOT_CONVERGED
    return ExitCode.OK


def cmd_bench(
    path: Path,
    solvers: Sequence[str],
    repetitions: int,
    overrides: Overrides,
    out_dir: Path,
) -> ExitCode:
    """Runs every solver over the states of a reference run of the first solver."""
    if not solvers:
        raise UsageError("Benchmark needs at least one solver")
    closed_loop = read_closed_loop_input(path)
    config = overrides.rh_config(closed_loop.config, solvers[0])
    riccati = solve_riccati(closed_loop.game)
    stacked = compile_game(closed_loop.game, config.horizon_T, riccati)

    reference = run(closed_loop.game, riccati, config, closed_loop.x0, stacked=stacked)
    solver_configs = {
        solver: overrides.rh_config(config, solver).effective_solver_config()
        for solver in (get_solver(name).name for name in solvers)
    }
    records = run_benchmark(
        stacked, reference.states[:-1], solvers, config, solver_configs, repetitions
    )

    out_dir.mkdir(parents=True, exist_ok=True)
    write_bench_csv(records, out_dir / BENCH_FILE)
    table = markdown_summary(records)
    (out_dir / BENCH_SUMMARY_FILE).write_text(table, encoding="utf-8")
    print(table, end="")
    logs(f"Wrote {len(records)} benchmark records to {out_dir / BENCH_FILE}")
    return ExitCode.OK
