"""Receding-horizon closed loop: solve the stacked game at the current state, apply the first
input, move the plant, repeat.

Only ``q`` and ``d`` of the AVI change between steps, so the game is compiled once and the
solver gets one ``OperatorCache`` for the whole run.
"""

import logging

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import VIOLATION_TOL
from avi_games.data_structures.enums import LoggingLevel, SolverStatus, WarmStartPadding
from avi_games.data_structures.models import Vector, as_vector
from avi_games.games.compiler import compile_game, predict_states
from avi_games.games.models import LqGame, RiccatiSolution, StackedGame
from avi_games.games.riccati import solve_riccati
from avi_games.scenarios.models import Scenario
from avi_games.simulation.exceptions import SimulationError, SolverFailure
from avi_games.simulation.models import RhConfig, RhLog
from avi_games.simulation.violations import step_violation
from avi_games.solvers.models import OperatorCache
from avi_games.solvers.registry import run_solver
from avi_games.vi_core.exceptions import InfeasibleSet, NumericalFailure
from avi_games.vi_core.operations import Projection

logger = logging.getLogger(__name__)


def shift_warm_start(
    stacked: StackedGame,
    prev_u: Vector,
    prev_lambda: Vector,
    padding: WarmStartPadding = WarmStartPadding.ZERO,
    prev_x0: Vector | None = None,
) -> Projection:
    """Drops stage 0 of every agent's previous input sequence and appends one stage.

    The appended stage is zero, or with ``FEEDBACK`` padding the Riccati feedback applied to
    the terminal state predicted from ``prev_x0``. Multipliers restart from ones.
    """
    blocks = stacked.input_blocks(np.asarray(prev_u, dtype=float))
    if padding == WarmStartPadding.FEEDBACK:
        if prev_x0 is None:
            raise SimulationError("Feedback padding needs the state the previous solve started at")
        terminal = predict_states(stacked, prev_x0, prev_u)[-1]
        tails = [gain @ terminal for gain in stacked.riccati.K]
    else:
        tails = [np.zeros(block.shape[1]) for block in blocks]

    shifted = [np.vstack([block[1:], tail]).ravel() for block, tail in zip(blocks, tails)]
    return np.concatenate(shifted), np.ones_like(np.asarray(prev_lambda, dtype=float))


def run(
    game: LqGame,
    riccati: RiccatiSolution | None,
    config: RhConfig,
    x0: Vector,
    stacked: StackedGame | None = None,
) -> RhLog:
    """Simulates ``config.sim_steps`` steps from ``x0``.

    The plant is moved with the open-loop matrices and the physically applied input
    ``K_stab x + u[0]``. Raises ``SolverFailure`` with the partial log if a solve breaks down;
    solves that stop on the iteration cap are logged and the run goes on.
    """
    x = as_vector(x0, "x0").copy()
    if stacked is None:
        stacked = compile_game(game, config.horizon_T, riccati)
    solver_config = config.effective_solver_config()
    cache = OperatorCache(stacked.M)
    A_open, B = game.open_loop_A, game.B_stacked

    log = RhLog(solver=config.solver.value, states=[x.copy()])
    warm: Projection | None = None

    for step in range(config.sim_steps):
        problem = stacked.problem_at(x)
        try:
            report = run_solver(config.solver, problem, solver_config, warm=warm, cache=cache)
        except (NumericalFailure, InfeasibleSet) as err:
            raise SolverFailure(f"Solve at step {step} failed: {err}", log, step) from err
        if report.status == SolverStatus.NUMERICAL_FAILURE:
            raise SolverFailure(
                f"Solve at step {step} broke down with residual {report.residual:.3e}", log, step
            )

        u = stacked.first_inputs(report.solution)
        applied = game.applied_inputs(x, u)
        next_state = A_open @ x + B @ applied
        violation, collision = step_violation(game, x, u, next_state)
        log.record(report, u, applied, next_state, violation, collision)

        logs(
            f"{report.status.value} after {report.iterations} iterations, residual "
            f"{report.residual:.3e}, {report.elapsed:.4f} s",
            level=LoggingLevel.DEBUG,
            context=f"step {step}",
        )
        if violation > VIOLATION_TOL:
            logs(
                f"Constraint violated by {violation:.3e}" + (" (collision)" if collision else ""),
                level=LoggingLevel.WARNING,
                context=f"step {step}",
            )

        if config.warm_start:
            warm = shift_warm_start(
                stacked, report.solution, report.multipliers, config.padding, x
            )
        x = next_state

    logs(
        f"Simulated {log.steps} steps with {log.solver}: median "
        f"{np.median(log.iterations):.1f} iterations, "
        f"{sum(status != SolverStatus.CONVERGED for status in log.status)} unconverged solves, "
        f"collision: {log.collided}",
        context="simulation",
    )
    return log


def simulate_scenario(scenario: Scenario, config: RhConfig) -> RhLog:
    """Runs the scenario from its initial condition and attaches physical trajectories."""
    riccati = solve_riccati(scenario.game)
    try:
        log = run(scenario.game, riccati, config, scenario.x0)
    except SolverFailure as err:
        attach_physical(err.log, scenario)
        raise
    attach_physical(log, scenario)
    return log


def attach_physical(log: RhLog, scenario: Scenario) -> None:
    positions, velocities = scenario.integrate(log.applied_trajectory)
    log.positions = positions
    log.velocities = velocities
