"""Reading configuration blocks from JSON or TOML files."""

import json
import tomllib
from pathlib import Path
from typing import Any

from avi_games.auxil.exceptions import ApplicationException


class ConfigFileError(ApplicationException):
    pass


def read_config_block(path: Path, table: str) -> dict[str, Any]:
    """Reads a JSON or TOML file (chosen by suffix) and returns the block called ``table``.

    If the file has no such top-level key, the whole file is treated as the block.
    """
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as err:
        raise ConfigFileError(f"Could not read config file {path}") from err

    try:
        if path.suffix == ".toml":
            data = tomllib.loads(text)
        else:
            data = json.loads(text)
    except (tomllib.TOMLDecodeError, json.JSONDecodeError) as err:
        raise ConfigFileError(f"Could not parse config file {path}") from err

    if not isinstance(data, dict):
        raise ConfigFileError(f"Config file {path} must contain a mapping, got {type(data)}")

    block = data.get(table, data)
    if not isinstance(block, dict):
        raise ConfigFileError(f"Block {table!r} in {path} must be a mapping")
    return block
