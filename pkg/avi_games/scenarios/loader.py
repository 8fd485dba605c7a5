"""Loading scenarios from JSON files of the form
``{"type": "platooning" | "intersection", "params": {...}, "simulation": {...}}``.

The ``simulation`` block is optional and is read by ``RhConfig``.
"""

import dataclasses
import json
import logging
from pathlib import Path
from typing import Any, TypeVar

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.enums import ScenarioType
from avi_games.scenarios.exceptions import InvalidParams
from avi_games.scenarios.intersection import intersection_scenario
from avi_games.scenarios.models import Arrival, IntersectionParams, PlatooningParams, Scenario
from avi_games.scenarios.platooning import platooning_scenario

logger = logging.getLogger(__name__)

ParamsT = TypeVar("ParamsT", PlatooningParams, IntersectionParams)

BUNDLED_SCENARIOS_DIR = Path(__file__).parent.parent.resolve() / "data" / "scenarios"


def bundled_scenario_path(kind: ScenarioType | str) -> Path:
    return BUNDLED_SCENARIOS_DIR / f"{ScenarioType(kind).value}.json"


class ScenarioLoader:
    """Class for reading scenario documents and building scenarios from them."""

    @classmethod
    def load(cls, path: Path) -> Scenario:
        return cls.build(cls.read_document(path))

    @classmethod
    def read_document(cls, path: Path) -> dict[str, Any]:
        logger.info(f"Reading scenario from {path}")
        try:
            document = json.loads(path.read_text(encoding="utf-8"))
        except OSError as err:
            raise InvalidParams(f"Could not read scenario file {path}: {err}") from err
        except json.JSONDecodeError as err:
            raise InvalidParams(f"Scenario file {path} is not valid JSON: {err}") from err
        if not isinstance(document, dict):
            raise InvalidParams(f"Scenario file {path} must contain a JSON object")
        return document

    @classmethod
    def build(cls, document: dict[str, Any]) -> Scenario:
        try:
            kind = ScenarioType(document["type"])
        except KeyError as err:
            raise InvalidParams("Scenario document has no 'type'") from err
        except ValueError as err:
            raise InvalidParams(f"Unknown scenario type {document['type']!r}") from err

        params = document.get("params", {})
        if not isinstance(params, dict):
            raise InvalidParams("Scenario 'params' must be a JSON object")

        if kind == ScenarioType.PLATOONING:
            scenario = platooning_scenario(cls._platooning_params(params))
        else:
            scenario = intersection_scenario(cls._intersection_params(params))
        logs(f"Built {kind.value} scenario with {scenario.num_vehicles} vehicles")
        return scenario

    @classmethod
    def _platooning_params(cls, data: dict[str, Any]) -> PlatooningParams:
        return cls._construct(PlatooningParams, data)

    @classmethod
    def _intersection_params(cls, data: dict[str, Any]) -> IntersectionParams:
        data = dict(data)
        if "arrivals" in data:
            try:
                data["arrivals"] = tuple(
                    Arrival(time=float(item["time"]), maneuver=item["maneuver"])
                    for item in data["arrivals"]
                )
            except (KeyError, TypeError, ValueError) as err:
                raise InvalidParams(f"Arrivals need 'time' and 'maneuver': {err}") from err
        if data.get("precedence") is not None:
            # JSON object keys are always strings
            try:
                data["precedence"] = {
                    int(key): int(value) for key, value in data["precedence"].items()
                }
            except (AttributeError, ValueError) as err:
                raise InvalidParams(f"Precedence must map vehicle indices: {err}") from err
        return cls._construct(IntersectionParams, data)

    @staticmethod
    def _construct(params_type: type[ParamsT], data: dict[str, Any]) -> ParamsT:
        known = {item.name for item in dataclasses.fields(params_type)}
        unknown = set(data) - known
        if unknown:
            raise InvalidParams(
                f"Unknown {params_type.__name__} keys: {', '.join(sorted(unknown))}"
            )
        try:
            return params_type(**data)
        except (TypeError, ValueError) as err:
            raise InvalidParams(f"Invalid {params_type.__name__}: {err}") from err


def load_scenario(path: Path) -> Scenario:
    return ScenarioLoader.load(path)
