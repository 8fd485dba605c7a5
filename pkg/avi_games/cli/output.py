"""Files written by ``avi-games solve``.

``json`` writes the whole report to ``report.json``. ``csv`` writes ``solution.csv``
(``variable, index, value`` with ``variable`` being ``u`` or ``lambda``) and ``trace.csv``
(one row per examined iterate; Newton-only columns are blank for first-order solvers).
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from avi_games.cli.exceptions import OutputFileError
from avi_games.data_structures.enums import OutputFormat
from avi_games.data_structures.models import SolverReport, Vector

logger = logging.getLogger(__name__)

REPORT_FILE = "report.json"
SOLUTION_FILE = "solution.csv"
TRACE_FILE = "trace.csv"
TRACE_COLUMNS = ("k", "residual", "merit", "kkt_norm", "step_size")


def write_report(report: SolverReport, out_dir: Path, output_format: OutputFormat) -> list[Path]:
    out_dir.mkdir(parents=True, exist_ok=True)
    if output_format == OutputFormat.JSON:
        path = out_dir / REPORT_FILE
        path.write_text(json.dumps(report.to_dict(), indent=2), encoding="utf-8")
        return [path]

    solution_path = out_dir / SOLUTION_FILE
    with solution_path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(("variable", "index", "value"))
        writer.writerows(("u", index, value) for index, value in enumerate(report.solution))
        writer.writerows(
            ("lambda", index, value) for index, value in enumerate(report.multipliers)
        )

    trace_path = out_dir / TRACE_FILE
    with trace_path.open("w", newline="", encoding="utf-8") as file:
        writer = csv.writer(file)
        writer.writerow(TRACE_COLUMNS)
        for k, residual in enumerate(report.residual_trace):
            writer.writerow(
                (
                    k,
                    residual,
                    _entry(report.merit_trace, k),
                    _entry(report.kkt_trace, k),
                    _entry(report.step_sizes, k),
                )
            )
    return [solution_path, trace_path]


def _entry(values: list[float], index: int) -> float | str:
    return values[index] if index < len(values) else ""


def load_report(path: Path) -> SolverReport:
    try:
        return SolverReport.from_dict(json.loads(path.read_text(encoding="utf-8")))
    except OSError as err:
        raise OutputFileError(f"Could not read report {path}") from err
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as err:
        raise OutputFileError(f"Report {path} is malformed: {err}") from err


def load_solution_csv(path: Path) -> tuple[Vector, Vector]:
    """``(u, lambda)`` from a solution file."""
    values: dict[str, list[float]] = {"u": [], "lambda": []}
    try:
        with path.open(newline="", encoding="utf-8") as file:
            for row in csv.DictReader(file):
                values[row["variable"]].append(float(row["value"]))
    except OSError as err:
        raise OutputFileError(f"Could not read solution file {path}") from err
    except (KeyError, ValueError) as err:
        raise OutputFileError(f"Solution file {path} is malformed: {err}") from err
    return np.array(values["u"]), np.array(values["lambda"])


def load_trace_csv(path: Path) -> dict[str, list[Any]]:
    """Columns of a trace file. Blank entries are dropped, so every column holds as many
    values as its trace had.
    """
    columns: dict[str, list[Any]] = {name: [] for name in TRACE_COLUMNS}
    try:
        with path.open(newline="", encoding="utf-8") as file:
            for row in csv.DictReader(file):
                columns["k"].append(int(row["k"]))
                for name in TRACE_COLUMNS[1:]:
                    if row[name]:
                        columns[name].append(float(row[name]))
    except OSError as err:
        raise OutputFileError(f"Could not read trace file {path}") from err
    except (KeyError, ValueError) as err:
        raise OutputFileError(f"Trace file {path} is malformed: {err}") from err
    return columns
