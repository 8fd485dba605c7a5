"""JSON documents for LQ games. Matrices are row-major nested lists.

Empty matrices are written as ``[]``, so their widths are restored from ``A`` and ``B``.
"""

import json
import logging
from pathlib import Path
from typing import Any

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.models import as_matrix
from avi_games.games.exceptions import InvalidGame
from avi_games.games.models import ConstraintSpec, LqGame

logger = logging.getLogger(__name__)

GAME_KEYS = ("A", "B", "Q", "R", "constraints")
CONSTRAINT_KEYS = ("input_state", "input_coupling", "input_offset", "state_rows", "state_offset")


def constraints_to_dict(spec: ConstraintSpec) -> dict[str, Any]:
    return {
        "input_state": spec.input_state.tolist(),
        "input_coupling": [block.tolist() for block in spec.input_coupling],
        "input_offset": spec.input_offset.tolist(),
        "state_rows": spec.state_rows.tolist(),
        "state_offset": spec.state_offset.tolist(),
        "input_labels": [label.value for label in spec.input_labels],
        "state_labels": [label.value for label in spec.state_labels],
        "collision_gap": spec.collision_gap,
    }


def game_to_dict(game: LqGame) -> dict[str, Any]:
    gains = game.stabilizer_gains
    return {
        "A": game.A.tolist(),
        "B": [b.tolist() for b in game.B],
        "Q": [q.tolist() for q in game.Q],
        "R": [r.tolist() for r in game.R],
        "constraints": constraints_to_dict(game.constraints),
        "stabilizer_gains": None if gains is None else [gain.tolist() for gain in gains],
    }


def _missing(data: dict[str, Any], keys: tuple[str, ...], what: str) -> None:
    missing = [key for key in keys if key not in data]
    if missing:
        raise InvalidGame(f"{what} is missing keys: {', '.join(missing)}")


def constraints_from_dict(data: Any, n: int, input_dims: tuple[int, ...]) -> ConstraintSpec:
    if not isinstance(data, dict):
        raise InvalidGame(f"Constraints must be a JSON object, got {type(data).__name__}")
    _missing(data, CONSTRAINT_KEYS, "Constraints")
    coupling = data["input_coupling"]
    if len(coupling) != len(input_dims):
        raise InvalidGame(f"Expected {len(input_dims)} input coupling blocks, got {len(coupling)}")
    try:
        return ConstraintSpec(
            input_state=as_matrix(data["input_state"], "input_state", columns=n),
            input_coupling=tuple(
                as_matrix(block, "input_coupling", columns=dim)
                for block, dim in zip(coupling, input_dims)
            ),
            input_offset=data["input_offset"],
            state_rows=as_matrix(data["state_rows"], "state_rows", columns=n),
            state_offset=data["state_offset"],
            input_labels=tuple(data.get("input_labels", ())),
            state_labels=tuple(data.get("state_labels", ())),
            collision_gap=data.get("collision_gap"),
        )
    except (TypeError, ValueError) as err:
        raise InvalidGame(f"Invalid constraints: {err}") from err


def game_from_dict(data: Any) -> LqGame:
    if not isinstance(data, dict):
        raise InvalidGame(f"Game document must be a JSON object, got {type(data).__name__}")
    _missing(data, GAME_KEYS, "Game document")
    try:
        A = np.asarray(data["A"], dtype=float)
        B = [np.asarray(b, dtype=float) for b in data["B"]]
        input_dims = tuple(int(b.shape[1]) for b in B)
    except (TypeError, ValueError, IndexError) as err:
        raise InvalidGame(f"Invalid dynamics: {err}") from err

    constraints = constraints_from_dict(data["constraints"], A.shape[0], input_dims)
    gains = data.get("stabilizer_gains")
    try:
        return LqGame(
            A=A,
            B=tuple(B),
            Q=tuple(data["Q"]),
            R=tuple(data["R"]),
            constraints=constraints,
            stabilizer_gains=None if gains is None else tuple(gains),
        )
    except (TypeError, ValueError) as err:
        raise InvalidGame(f"Invalid game: {err}") from err


def load_game(path: Path) -> LqGame:
    try:
        data = json.loads(path.read_text(encoding="utf-8"))
    except OSError as err:
        raise InvalidGame(f"Could not read game file {path}: {err}") from err
    except json.JSONDecodeError as err:
        raise InvalidGame(f"Game file {path} is not valid JSON: {err}") from err
    game = game_from_dict(data)
    logs(f"Loaded {game.num_agents}-agent game with n={game.n} from {path}")
    return game


def save_game(game: LqGame, path: Path) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(game_to_dict(game)), encoding="utf-8")
