"""Solver comparison on one receding-horizon instance sequence.

A reference closed-loop run fixes the sequence of initial states; every solver then solves the
AVIs of exactly these states, warm-starting from its own previous solution. The solvers thus
see identical instances even when their solutions differ within tolerance.
"""

import csv
import logging
from collections.abc import Sequence
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.enums import SolverName, SolverStatus
from avi_games.data_structures.models import Vector
from avi_games.games.models import StackedGame
from avi_games.simulation.exceptions import LogFileError, SimulationError
from avi_games.simulation.models import RhConfig
from avi_games.simulation.receding_horizon import shift_warm_start
from avi_games.solvers.models import OperatorCache
from avi_games.solvers.registry import SolverConfig, run_solver
from avi_games.vi_core.operations import Projection

logger = logging.getLogger(__name__)

BENCH_COLUMNS = ("repetition", "step", "solver", "iterations", "elapsed_s", "residual", "status")


@dataclass(frozen=True)
class BenchRecord:
    repetition: int
    step: int
    solver: str
    iterations: int
    elapsed_s: float
    residual: float
    status: SolverStatus


def replay(
    stacked: StackedGame,
    states: Sequence[Vector],
    solver: SolverName,
    solver_config: SolverConfig,
    config: RhConfig,
    repetition: int = 0,
) -> list[BenchRecord]:
    """Solves the AVI at every state of ``states`` with one solver."""
    cache = OperatorCache(stacked.M)
    warm: Projection | None = None
    records = []
    for step, x in enumerate(states):
        report = run_solver(solver, stacked.problem_at(x), solver_config, warm=warm, cache=cache)
        records.append(
            BenchRecord(
                repetition=repetition,
                step=step,
                solver=solver.value,
                iterations=report.iterations,
                elapsed_s=report.elapsed,
                residual=report.residual,
                status=report.status,
            )
        )
        if config.warm_start:
            warm = shift_warm_start(
                stacked, report.solution, report.multipliers, config.padding, x
            )
    return records


def run_benchmark(
    stacked: StackedGame,
    states: Sequence[Vector],
    solvers: Sequence[SolverName | str],
    config: RhConfig,
    solver_configs: dict[SolverName, SolverConfig] | None = None,
    repetitions: int = 1,
) -> list[BenchRecord]:
    """Every solver over ``states`` ``repetitions`` times. ``solver_configs`` defaults to the
    solver defaults with the budget of ``config``.
    """
    if not solvers:
        raise SimulationError("Benchmark needs at least one solver")
    if repetitions < 1:
        raise SimulationError(f"{repetitions=} must be at least 1")

    solver_configs = solver_configs or {}
    records: list[BenchRecord] = []
    for repetition in range(repetitions):
        for name in solvers:
            solver = SolverName(name)
            solver_config = solver_configs.get(solver) or RhConfig(
                solver=solver, iteration_budget=config.iteration_budget
            ).effective_solver_config()
            cell = replay(stacked, states, solver, solver_config, config, repetition)
            logs(
                f"Repetition {repetition}: median "
                f"{np.median([record.iterations for record in cell]):.1f} iterations over "
                f"{len(cell)} instances",
                context=solver.value,
            )
            records.extend(cell)
    return records


def write_bench_csv(records: Sequence[BenchRecord], path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(BENCH_COLUMNS)
        for record in records:
            writer.writerow(
                (
                    record.repetition,
                    record.step,
                    record.solver,
                    record.iterations,
                    record.elapsed_s,
                    record.residual,
                    record.status.value,
                )
            )


def load_bench_csv(path: Path) -> list[BenchRecord]:
    try:
        with path.open(newline="", encoding="utf-8") as file:
            return [
                BenchRecord(
                    repetition=int(row["repetition"]),
                    step=int(row["step"]),
                    solver=row["solver"],
                    iterations=int(row["iterations"]),
                    elapsed_s=float(row["elapsed_s"]),
                    residual=float(row["residual"]),
                    status=SolverStatus(row["status"]),
                )
                for row in csv.DictReader(file)
            ]
    except OSError as err:
        raise LogFileError(f"Could not read benchmark file {path}") from err
    except (KeyError, ValueError) as err:
        raise LogFileError(f"Benchmark file {path} is malformed: {err}") from err


def markdown_summary(records: Sequence[BenchRecord]) -> str:
    """Table of per-solver medians, solvers in order of first appearance."""
    solvers = list(dict.fromkeys(record.solver for record in records))
    lines = [
        "| solver | instances | median iterations | median time (ms) | converged |",
        "|---|---|---|---|---|",
    ]
    for solver in solvers:
        own = [record for record in records if record.solver == solver]
        converged = sum(record.status == SolverStatus.CONVERGED for record in own)
        lines.append(
            f"| {solver} | {len(own)} "
            f"| {np.median([record.iterations for record in own]):.1f} "
            f"| {1000 * np.median([record.elapsed_s for record in own]):.3f} "
            f"| {converged}/{len(own)} |"
        )
    return "\n".join(lines) + "\n"
