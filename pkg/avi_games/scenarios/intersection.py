"""Unsignalized intersection crossing with first-come, first-served precedence.

A leader's state is its velocity error ``v_ref - v_i``; a follower's state is
``[p_chi - p_i - d_i, v_chi - v_i]`` where ``chi`` is the vehicle it follows. States are
stacked in vehicle index order.
"""

import logging

import numpy as np
import scipy.linalg

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import INTERSECTION_STABILIZER_GAIN
from avi_games.data_structures.enums import ScenarioType
from avi_games.data_structures.models import Matrix, Vector
from avi_games.games.compiler import prestabilize
from avi_games.games.models import LqGame
from avi_games.scenarios.constraints import chain_constraints, velocity_rows
from avi_games.scenarios.exceptions import InvalidParams
from avi_games.scenarios.models import IntersectionParams, Scenario
from avi_games.scenarios.precedence import assign_precedence, chain_order, predecessors

logger = logging.getLogger(__name__)


def state_layout(
    predecessor: tuple[int | None, ...]
) -> tuple[tuple[int, ...], tuple[int | None, ...], tuple[int, ...]]:
    """Offsets of every vehicle's block, then the gap and velocity error indices."""
    offsets, gap_index, speed_index = [], [], []
    offset = 0
    for parent in predecessor:
        offsets.append(offset)
        if parent is None:
            gap_index.append(None)
            speed_index.append(offset)
            offset += 1
        else:
            gap_index.append(offset)
            speed_index.append(offset + 1)
            offset += 2
    return tuple(offsets), tuple(gap_index), tuple(speed_index)


def intersection_dynamics(
    predecessor: tuple[int | None, ...], tau: float
) -> tuple[Matrix, tuple[Matrix, ...]]:
    """Open-loop ``A = blkdiag(A_i)`` and ``B_i = col(B_ij)``.

    An input of vehicle ``i`` moves its own errors and the errors of every vehicle following it.
    """
    offsets, _, _ = state_layout(predecessor)
    n = sum(1 if parent is None else 2 for parent in predecessor)
    A = scipy.linalg.block_diag(
        *(
            np.eye(1) if parent is None else np.array([[1.0, tau], [0.0, 1.0]])
            for parent in predecessor
        )
    )
    double_integrator = np.array([tau**2 / 2, tau])

    B = []
    for vehicle, parent in enumerate(predecessor):
        column = np.zeros((n, 1))
        start = offsets[vehicle]
        if parent is None:
            column[start, 0] = -tau
        else:
            column[start : start + 2, 0] = -double_integrator
        for follower, followed in enumerate(predecessor):
            if followed == vehicle:
                column[offsets[follower] : offsets[follower] + 2, 0] = double_integrator
        B.append(column)
    return A, tuple(B)


def stabilizer_gains(predecessor: tuple[int | None, ...]) -> list[Matrix]:
    """Every vehicle feeds back the sum of its own errors."""
    offsets, _, _ = state_layout(predecessor)
    n = sum(1 if parent is None else 2 for parent in predecessor)
    gains = []
    for vehicle, parent in enumerate(predecessor):
        gain = np.zeros((1, n))
        size = 1 if parent is None else 2
        gain[0, offsets[vehicle] : offsets[vehicle] + size] = INTERSECTION_STABILIZER_GAIN
        gains.append(gain)
    return gains


def intersection_scenario(params: IntersectionParams) -> Scenario:
    """Raises ``CyclicPrecedence`` if an explicit precedence map has a cycle."""
    if params.precedence is None:
        precedence, _ = assign_precedence(params.arrivals)
    else:
        precedence = {int(key): int(value) for key, value in params.precedence.items()}
        outside = [key for key in precedence if not 0 <= key < params.num_agents]
        if outside:
            raise InvalidParams(f"Precedence names unknown vehicles {outside}")
    predecessor = predecessors(precedence, params.num_agents)
    order = chain_order(predecessor)
    _, gap_index, speed_index = state_layout(predecessor)

    A, B = intersection_dynamics(predecessor, params.tau_s)
    n = A.shape[0]
    no_headway = np.zeros(params.num_agents)
    constraints = chain_constraints(
        velocity_rows(n, predecessor, order, speed_index),
        predecessor,
        gap_index,
        standoff=params.standoff,
        headway=no_headway,
        v_ref=params.v_ref,
        d_min=params.d_min,
        v_bounds=params.v_bounds,
        u_bounds=params.u_bounds,
    )
    game = LqGame(
        A=A,
        B=B,
        Q=tuple(np.eye(n) for _ in predecessor),
        R=tuple(np.eye(1) for _ in predecessor),
        constraints=constraints,
    )
    game = prestabilize(game, stabilizer_gains(predecessor))
    leaders = sum(parent is None for parent in predecessor)
    logs(
        f"{params.num_agents} vehicles, {leaders} leaders: n={n}, "
        f"{constraints.num_state_rows} state rows per stage",
        context=ScenarioType.INTERSECTION.value,
    )
    return Scenario(
        kind=ScenarioType.INTERSECTION,
        game=game,
        predecessor=predecessor,
        order=order,
        gap_index=gap_index,
        speed_index=speed_index,
        standoff=params.standoff,
        headway=no_headway,
        v_ref=params.v_ref,
        tau_s=params.tau_s,
        positions=params.positions,
        velocities=params.velocities,
    )


def build_intersection(params: IntersectionParams) -> tuple[LqGame, Vector]:
    """Pre-stabilized intersection game and its initial state."""
    scenario = intersection_scenario(params)
    return scenario.game, scenario.x0
