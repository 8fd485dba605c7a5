"""JSON documents ``{"M": ..., "q": ..., "D": ..., "d": ...}`` with row-major matrices."""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.models import AviProblem
from avi_games.vi_core.exceptions import ProblemSchemaError

logger = logging.getLogger(__name__)

PROBLEM_KEYS = ("M", "q", "D", "d")


def problem_from_dict(data: Any) -> AviProblem:
    if not isinstance(data, dict):
        raise ProblemSchemaError(f"AVI document must be a JSON object, got {type(data).__name__}")
    missing = [key for key in PROBLEM_KEYS if key not in data]
    if missing:
        raise ProblemSchemaError(f"AVI document is missing keys: {', '.join(missing)}")

    try:
        problem = AviProblem.from_arrays(M=data["M"], q=data["q"], D=data["D"], d=data["d"])
    except (TypeError, ValueError) as err:
        raise ProblemSchemaError(f"Invalid AVI document: {err}") from err

    for key in PROBLEM_KEYS:
        if not np.all(np.isfinite(getattr(problem, key))):
            raise ProblemSchemaError(f"{key} contains non-finite values")
    return problem


def problem_from_json(text: str) -> AviProblem:
    try:
        data = json.loads(text)
    except json.JSONDecodeError as err:
        raise ProblemSchemaError(f"AVI document is not valid JSON: {err}") from err
    return problem_from_dict(data)


def problem_to_json(problem: AviProblem) -> str:
    return json.dumps(problem.to_dict())


def load_problem(path: Path) -> AviProblem:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ProblemSchemaError(f"Could not read AVI file {path}: {err}") from err
    problem = problem_from_json(text)
    logs(f"Loaded AVI with n={problem.n}, m={problem.m} from {path}")
    return problem


def save_problem(problem: AviProblem, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(problem_to_json(problem), encoding="utf-8")
