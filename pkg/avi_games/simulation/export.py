"""Writing run results to CSV and JSON files, and reading them back.

Files:
    metrics CSV     one row per step: t, iterations, elapsed_s, residual, status, violation_max,
                    collision
    trajectory CSV  one row per logged state: t, positions ``p_i`` and velocities ``v_i`` of
                    every vehicle (or game states ``x_j``), applied inputs ``u_i`` (blank in
                    the last row)
    summary JSON    ``{solver name: summary}`` with percentiles of iterations and time
"""

import csv
import json
import logging
from pathlib import Path

import numpy as np

from avi_games.data_structures.enums import SolverStatus
from avi_games.simulation.exceptions import LogFileError
from avi_games.simulation.models import (
    Percentiles,
    RhLog,
    RunSummary,
    StepMetrics,
    TrajectoryTable,
    ViolationReport,
)

logger = logging.getLogger(__name__)

METRICS_COLUMNS = (
    "t",
    "iterations",
    "elapsed_s",
    "residual",
    "status",
    "violation_max",
    "collision",
)


def summarize(log: RhLog, violations: ViolationReport | None = None) -> RunSummary:
    counts: dict[str, int] = {}
    for status in log.status:
        counts[status.value] = counts.get(status.value, 0) + 1
    return RunSummary(
        solver=log.solver,
        steps=log.steps,
        iterations=Percentiles.of(log.iterations),
        elapsed_s=Percentiles.of(log.elapsed),
        total_elapsed_s=float(sum(log.elapsed)),
        status_counts=counts,
        violations=violations or ViolationReport(),
    )


def metrics_rows(log: RhLog) -> list[StepMetrics]:
    return [
        StepMetrics(
            t=step,
            iterations=log.iterations[step],
            elapsed_s=log.elapsed[step],
            residual=log.residual[step],
            status=log.status[step],
            violation_max=log.violation_max[step],
            collision=log.collision[step],
        )
        for step in range(log.steps)
    ]


def write_metrics(log: RhLog, path: Path) -> None:
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(METRICS_COLUMNS)
        for row in metrics_rows(log):
            writer.writerow(
                (
                    row.t,
                    row.iterations,
                    row.elapsed_s,
                    row.residual,
                    row.status.value,
                    row.violation_max,
                    int(row.collision),
                )
            )
    logger.info(f"Wrote {log.steps} metrics rows to {path}")


def load_metrics(path: Path) -> list[StepMetrics]:
    rows = []
    try:
        with path.open(newline="", encoding="utf-8") as file:
            for row in csv.DictReader(file):
                rows.append(
                    StepMetrics(
                        t=int(row["t"]),
                        iterations=int(row["iterations"]),
                        elapsed_s=float(row["elapsed_s"]),
                        residual=float(row["residual"]),
                        status=SolverStatus(row["status"]),
                        violation_max=float(row["violation_max"]),
                        collision=bool(int(row["collision"])),
                    )
                )
    except OSError as err:
        raise LogFileError(f"Could not read metrics file {path}") from err
    except (KeyError, TypeError, ValueError) as err:
        raise LogFileError(f"Metrics file {path} is malformed: {err}") from err
    return rows


def write_trajectory(log: RhLog, path: Path) -> None:
    if log.positions is not None and log.velocities is not None:
        num_vehicles = log.positions.shape[1]
        header = [f"p_{i}" for i in range(num_vehicles)] + [f"v_{i}" for i in range(num_vehicles)]
        table = np.hstack([log.positions, log.velocities])
    else:
        table = log.state_trajectory
        header = [f"x_{j}" for j in range(table.shape[1])]

    applied = log.applied_trajectory
    num_inputs = len(log.applied_inputs[0]) if log.applied_inputs else 0
    with path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(["t", *header, *(f"u_{i}" for i in range(num_inputs))])
        for step, values in enumerate(table):
            inputs = list(applied[step]) if step < log.steps else [""] * num_inputs
            writer.writerow([step, *values, *inputs])
    logger.info(f"Wrote {table.shape[0]} trajectory rows to {path}")


def load_trajectory(path: Path) -> TrajectoryTable:
    try:
        with path.open(newline="", encoding="utf-8") as file:
            reader = csv.reader(file)
            header = next(reader)
            rows = list(reader)
    except OSError as err:
        raise LogFileError(f"Could not read trajectory file {path}") from err
    except StopIteration as err:
        raise LogFileError(f"Trajectory file {path} is empty") from err

    def _columns(prefix: str) -> list[int]:
        return [index for index, name in enumerate(header) if name.startswith(prefix)]

    try:
        # the last row has blank inputs
        table = np.array(
            [[float(value) if value else np.nan for value in row] for row in rows]
        ).reshape(len(rows), len(header))
    except ValueError as err:
        raise LogFileError(f"Trajectory file {path} is malformed: {err}") from err

    times = table[:, 0]
    inputs = table[:-1, _columns("u_")]
    if _columns("p_"):
        return TrajectoryTable(
            times=times,
            applied_inputs=inputs,
            positions=table[:, _columns("p_")],
            velocities=table[:, _columns("v_")],
        )
    return TrajectoryTable(times=times, applied_inputs=inputs, states=table[:, _columns("x_")])


def write_summary(summaries: list[RunSummary], path: Path) -> None:
    document = {summary.solver: summary.to_dict() for summary in summaries}
    path.write_text(json.dumps(document, indent=2), encoding="utf-8")
    logger.info(f"Wrote summary of {', '.join(document)} to {path}")


def load_summary(path: Path) -> dict[str, RunSummary]:
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
        return {solver: RunSummary.from_dict(data) for solver, data in document.items()}
    except OSError as err:
        raise LogFileError(f"Could not read summary file {path}") from err
    except (json.JSONDecodeError, AttributeError, KeyError, TypeError) as err:
        raise LogFileError(f"Summary file {path} is malformed: {err}") from err
