"""First-come, first-served precedence between vehicles whose paths through an intersection
conflict.

Maneuvers are two-letter strings: entry direction, then exit direction (``"NS"`` enters from
the north and leaves to the south). The intersection arms are placed on a circle in the order
N, E, S, W; a path is the chord between its arms.
"""

import logging
from collections.abc import Sequence
from typing import get_args

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.literal_types import Direction, Maneuver
from avi_games.scenarios.exceptions import CyclicPrecedence, InvalidParams
from avi_games.scenarios.models import Arrival

logger = logging.getLogger(__name__)

COMPASS: tuple[Direction, ...] = get_args(Direction)
MANEUVERS: tuple[Maneuver, ...] = get_args(Maneuver)

Precedence = dict[int, int]
"""Maps every follower to the vehicle it follows."""


def _between(point: int, start: int, end: int) -> bool:
    """Whether ``point`` lies strictly inside the arc going clockwise from ``start`` to ``end``."""
    return 0 < (point - start) % len(COMPASS) < (end - start) % len(COMPASS)


def paths_conflict(first: Maneuver, second: Maneuver) -> bool:
    """Same path, same entry, same exit, reversed path or crossing chords."""
    if first not in MANEUVERS or second not in MANEUVERS:
        raise InvalidParams(f"Unknown maneuver in {first=}, {second=}")
    if first == second or first[0] == second[0] or first[1] == second[1]:
        return True
    if first[0] == second[1] and first[1] == second[0]:
        return True

    start, end = COMPASS.index(first[0]), COMPASS.index(first[1])
    ends = [COMPASS.index(direction) for direction in second]
    if start in ends or end in ends:
        # one arm shared as entry of one path and exit of the other: separate lanes
        return False
    return _between(ends[0], start, end) != _between(ends[1], start, end)


def assign_precedence(arrivals: Sequence[Arrival]) -> tuple[Precedence, tuple[int, ...]]:
    """Every vehicle follows the latest earlier arrival on a conflicting path.

    Ties in arrival time are broken by vehicle index. Returns the precedence map and the
    leaders (vehicles with no conflicting earlier arrival) in index order.
    """
    order = sorted(range(len(arrivals)), key=lambda index: (arrivals[index].time, index))
    precedence: Precedence = {}
    for position, vehicle in enumerate(order):
        for earlier in reversed(order[:position]):
            if paths_conflict(arrivals[vehicle].maneuver, arrivals[earlier].maneuver):
                precedence[vehicle] = earlier
                break

    leaders = tuple(index for index in range(len(arrivals)) if index not in precedence)
    logs(f"{len(leaders)} leaders, precedence {precedence}", context="precedence")
    return precedence, leaders


def predecessors(precedence: Precedence, num_vehicles: int) -> tuple[int | None, ...]:
    return tuple(precedence.get(index) for index in range(num_vehicles))


def chain_order(predecessor: Sequence[int | None]) -> tuple[int, ...]:
    """Vehicles ordered so that every predecessor comes before its follower.

    Raises ``CyclicPrecedence`` if following the predecessors never reaches a leader.
    """
    depth: dict[int, int] = {}
    for vehicle in range(len(predecessor)):
        path = []
        current: int | None = vehicle
        while current is not None and current not in depth:
            if current in path:
                raise CyclicPrecedence(f"Vehicles {path} follow each other in a cycle")
            if not 0 <= current < len(predecessor):
                raise InvalidParams(f"Predecessor {current} is not a vehicle index")
            path.append(current)
            current = predecessor[current]
        base = -1 if current is None else depth[current]
        for offset, member in enumerate(reversed(path), start=1):
            depth[member] = base + offset
    return tuple(sorted(depth, key=lambda vehicle: (depth[vehicle], vehicle)))
