"""Scenario parameters and the built scenario.

Both scenarios describe vehicles moving along their own paths as double integrators. Every
follower keeps a gap to one predecessor; leaders track the reference velocity. The game state
holds, per vehicle, the gap error (followers only, plus a constant zero slot for the platoon
leader) and the velocity error.
"""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, get_args

import numpy as np

from avi_games.data_structures.constants import (
    DEFAULT_APPROACH_DISTANCE,
    DEFAULT_ARRIVAL_SPACING,
    DEFAULT_HEADWAY,
    DEFAULT_INTERSECTION_SIZE,
    DEFAULT_MANEUVER_CYCLE,
    DEFAULT_MIN_GAP,
    DEFAULT_PLATOON_SIZE,
    DEFAULT_STANDOFF,
    DEFAULT_TAU_S,
    DEFAULT_U_BOUNDS,
    DEFAULT_V_BOUNDS,
    DEFAULT_V_REF,
)
from avi_games.data_structures.enums import ScenarioType
from avi_games.data_structures.literal_types import Maneuver
from avi_games.data_structures.models import Matrix, Vector
from avi_games.games.models import LqGame
from avi_games.scenarios.constraints import velocity_rows
from avi_games.scenarios.exceptions import InvalidParams, ScenarioError


def _per_vehicle(value: float | Sequence[float], num_vehicles: int, name: str) -> Vector:
    """Broadcasts a scalar to every vehicle or checks the length of a sequence."""
    array = np.asarray(value, dtype=float)
    if array.ndim == 0:
        return np.full(num_vehicles, float(array))
    if array.shape != (num_vehicles,):
        raise InvalidParams(f"{name} needs {num_vehicles} values, got {array.shape[0]}")
    return array


def _pair(value: Sequence[float], name: str) -> tuple[float, float]:
    if len(value) != 2:
        raise InvalidParams(f"{name} must be [lower, upper], got {value}")
    return float(value[0]), float(value[1])


@dataclass(frozen=True, eq=False)
class _VehicleParams:
    """Fields shared by both scenarios. Subclasses call ``_check`` from ``__post_init__``."""

    num_agents: int
    tau_s: float = DEFAULT_TAU_S
    standoff: Any = DEFAULT_STANDOFF
    """Fixed gap ``d_i`` in meters. A number applies to every vehicle."""
    d_min: float = DEFAULT_MIN_GAP
    v_ref: float = DEFAULT_V_REF
    v_bounds: tuple[float, float] = DEFAULT_V_BOUNDS
    u_bounds: tuple[float, float] = DEFAULT_U_BOUNDS
    positions: Any = None
    velocities: Any = None

    def _check(self, min_agents: int) -> None:
        if self.num_agents < min_agents:
            raise InvalidParams(f"Need at least {min_agents} vehicles, got {self.num_agents}")
        v_min, v_max = _pair(self.v_bounds, "v_bounds")
        u_min, u_max = _pair(self.u_bounds, "u_bounds")
        if self.tau_s <= 0:
            raise InvalidParams(f"Sampling period must be positive, got {self.tau_s=}")
        if self.d_min <= 0:
            raise InvalidParams(f"Minimum gap must be positive, got {self.d_min=}")
        if not v_min < self.v_ref < v_max:
            raise InvalidParams(f"Need {v_min=} < {self.v_ref=} < {v_max=}")
        if not u_min < 0 < u_max:
            raise InvalidParams(f"Need {u_min=} < 0 < {u_max=}")

        object.__setattr__(self, "v_bounds", (v_min, v_max))
        object.__setattr__(self, "u_bounds", (u_min, u_max))
        object.__setattr__(
            self, "standoff", _per_vehicle(self.standoff, self.num_agents, "standoff")
        )
        if self.velocities is None:
            object.__setattr__(self, "velocities", np.full(self.num_agents, self.v_ref))
        object.__setattr__(
            self, "velocities", _per_vehicle(self.velocities, self.num_agents, "velocities")
        )


@dataclass(frozen=True, eq=False)
class PlatooningParams(_VehicleParams):
    """A platoon of ``num_agents`` vehicles on one lane, vehicle 0 leading.

    Without given positions the vehicles start at their desired spacing.
    """

    num_agents: int = DEFAULT_PLATOON_SIZE
    headway: Any = DEFAULT_HEADWAY
    """Time headway ``h_i`` in seconds."""

    def __post_init__(self) -> None:
        self._check(min_agents=2)
        object.__setattr__(self, "headway", _per_vehicle(self.headway, self.num_agents, "headway"))
        if self.positions is None:
            spacing = self.standoff + self.headway * self.velocities
            spacing[0] = 0.0
            object.__setattr__(self, "positions", -np.cumsum(spacing))
        object.__setattr__(
            self, "positions", _per_vehicle(self.positions, self.num_agents, "positions")
        )


@dataclass(frozen=True)
class Arrival:
    time: float
    """Arrival time at the intersection, seconds."""
    maneuver: Maneuver

    def __post_init__(self) -> None:
        if self.maneuver not in get_args(Maneuver):
            raise InvalidParams(f"Unknown maneuver {self.maneuver!r}")


def default_arrivals(num_vehicles: int) -> tuple[Arrival, ...]:
    return tuple(
        Arrival(
            time=DEFAULT_ARRIVAL_SPACING * index,
            maneuver=DEFAULT_MANEUVER_CYCLE[index % len(DEFAULT_MANEUVER_CYCLE)],
        )
        for index in range(num_vehicles)
    )


@dataclass(frozen=True, eq=False)
class IntersectionParams(_VehicleParams):
    """Vehicles approaching an unsignalized intersection.

    ``precedence`` maps followers to the vehicle they follow; if it is not given it is
    assigned first-come, first-served from ``arrivals``. Positions are the longitudinal
    progress along every vehicle's own path, with the conflict zone at 0.
    """

    num_agents: int = DEFAULT_INTERSECTION_SIZE
    arrivals: tuple[Arrival, ...] = ()
    precedence: dict[int, int] | None = None

    def __post_init__(self) -> None:
        self._check(min_agents=1)
        arrivals = tuple(self.arrivals) or default_arrivals(self.num_agents)
        if len(arrivals) != self.num_agents:
            raise InvalidParams(f"Got {len(arrivals)} arrivals for {self.num_agents} vehicles")
        object.__setattr__(self, "arrivals", arrivals)
        if self.positions is None:
            times = np.array([arrival.time for arrival in arrivals])
            object.__setattr__(
                self, "positions", -(DEFAULT_APPROACH_DISTANCE + self.v_ref * times)
            )
        object.__setattr__(
            self, "positions", _per_vehicle(self.positions, self.num_agents, "positions")
        )


@dataclass(frozen=True, eq=False)
class Scenario:
    """A built scenario: the pre-stabilized game plus what maps it to physical coordinates.

    ``gap_index[i]`` and ``speed_index[i]`` are the positions of vehicle ``i``'s gap and
    velocity errors in the game state (``gap_index`` is ``None`` for leaders). ``order`` lists
    the vehicles so that every predecessor precedes its followers.
    """

    kind: ScenarioType
    game: LqGame
    predecessor: tuple[int | None, ...]
    order: tuple[int, ...]
    gap_index: tuple[int | None, ...]
    speed_index: tuple[int, ...]
    standoff: Vector
    headway: Vector
    v_ref: float
    tau_s: float
    positions: Vector
    """Initial positions."""
    velocities: Vector
    """Initial velocities."""
    velocity_rows: Matrix = field(init=False, repr=False)
    """``S`` with ``v = v_ref - S x``: every vehicle's velocity errors summed up to its leader."""

    def __post_init__(self) -> None:
        rows = velocity_rows(self.game.n, self.predecessor, self.order, self.speed_index)
        object.__setattr__(self, "velocity_rows", rows)

    def _gap_slot(self, vehicle: int) -> int:
        slot = self.gap_index[vehicle]
        if slot is None:
            raise ScenarioError(f"Leader {vehicle} has no gap error in the state")
        return slot

    @property
    def num_vehicles(self) -> int:
        return len(self.predecessor)

    @property
    def leaders(self) -> tuple[int, ...]:
        return tuple(index for index, parent in enumerate(self.predecessor) if parent is None)

    @property
    def x0(self) -> Vector:
        return self.error_state(self.positions, self.velocities)

    def error_state(self, positions: Vector, velocities: Vector) -> Vector:
        x = np.zeros(self.game.n)
        for vehicle, parent in enumerate(self.predecessor):
            if parent is None:
                x[self.speed_index[vehicle]] = self.v_ref - velocities[vehicle]
                continue
            gap = positions[parent] - positions[vehicle]
            x[self._gap_slot(vehicle)] = (
                gap - self.standoff[vehicle] - self.headway[vehicle] * velocities[vehicle]
            )
            x[self.speed_index[vehicle]] = velocities[parent] - velocities[vehicle]
        return x

    def velocities_of(self, x: Vector) -> Vector:
        return self.v_ref - self.velocity_rows @ x

    def to_physical(self, x: Vector, leader_positions: Vector) -> tuple[Vector, Vector]:
        """Positions and velocities for the game state ``x``.

        The state holds no absolute position, so the leaders' positions are taken from
        ``leader_positions`` (indexed by vehicle; other entries are ignored).
        """
        velocities = self.velocities_of(x)
        positions = np.array(leader_positions, dtype=float)
        for vehicle in self.order:
            parent = self.predecessor[vehicle]
            if parent is None:
                continue
            spacing = self.standoff[vehicle] + self.headway[vehicle] * velocities[vehicle]
            positions[vehicle] = positions[parent] - x[self._gap_slot(vehicle)] - spacing
        return positions, velocities

    def integrate(self, applied_inputs: Matrix) -> tuple[Matrix, Matrix]:
        """Double-integrator positions and velocities (``steps + 1`` rows) from the initial
        condition under the given applied accelerations (``steps`` rows).
        """
        tau = self.tau_s
        positions = [np.asarray(self.positions, dtype=float)]
        velocities = [np.asarray(self.velocities, dtype=float)]
        for u in np.asarray(applied_inputs, dtype=float):
            positions.append(positions[-1] + tau * velocities[-1] + tau**2 / 2 * u)
            velocities.append(velocities[-1] + tau * u)
        return np.array(positions), np.array(velocities)
