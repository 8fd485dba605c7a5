"""Vehicle platooning: vehicle 0 tracks the reference velocity, every other vehicle follows the
one in front of it with a constant time-headway spacing policy.

State of vehicle ``i`` (two entries each): ``[0, v_ref - v_0]`` for the leader and
``[p_{i-1} - p_i - d_i - h_i v_i, v_{i-1} - v_i]`` for followers.
"""

import logging

import numpy as np
import scipy.linalg

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import PLATOON_STABILIZER_GAIN
from avi_games.data_structures.enums import ScenarioType
from avi_games.data_structures.models import Matrix, Vector
from avi_games.games.compiler import prestabilize
from avi_games.games.models import LqGame
from avi_games.scenarios.constraints import chain_constraints, velocity_rows
from avi_games.scenarios.models import PlatooningParams, Scenario

logger = logging.getLogger(__name__)


def platooning_dynamics(params: PlatooningParams) -> tuple[Matrix, tuple[Matrix, ...]]:
    """Open-loop ``A`` and the input matrices ``B_i`` in error coordinates."""
    tau = params.tau_s
    num_agents = params.num_agents
    leader_block = np.array([[0.0, 0.0], [0.0, 1.0]])
    follower_block = np.array([[1.0, tau], [0.0, 1.0]])
    A = scipy.linalg.block_diag(leader_block, *([follower_block] * (num_agents - 1)))

    B = []
    for agent in range(num_agents):
        column = np.zeros((2 * num_agents, 1))
        if agent == 0:
            column[0:2, 0] = [0.0, -tau]
        else:
            column[2 * agent : 2 * agent + 2, 0] = [
                -(params.headway[agent] * tau + tau**2 / 2),
                -tau,
            ]
        if agent + 1 < num_agents:
            column[2 * agent + 2 : 2 * agent + 4, 0] = [tau**2 / 2, tau]
        B.append(column)
    return A, tuple(B)


def stabilizer_gains(num_agents: int) -> list[Matrix]:
    """Every agent feeds back the sum of its own two error states."""
    gains = []
    for agent in range(num_agents):
        gain = np.zeros((1, 2 * num_agents))
        gain[0, 2 * agent : 2 * agent + 2] = PLATOON_STABILIZER_GAIN
        gains.append(gain)
    return gains


def platooning_scenario(params: PlatooningParams) -> Scenario:
    num_agents = params.num_agents
    n = 2 * num_agents
    predecessor = (None,) + tuple(range(num_agents - 1))
    order = tuple(range(num_agents))
    gap_index = (None,) + tuple(2 * agent for agent in range(1, num_agents))
    speed_index = tuple(2 * agent + 1 for agent in range(num_agents))

    A, B = platooning_dynamics(params)
    S = velocity_rows(n, predecessor, order, speed_index)
    constraints = chain_constraints(
        S,
        predecessor,
        gap_index,
        standoff=params.standoff,
        headway=params.headway,
        v_ref=params.v_ref,
        d_min=params.d_min,
        v_bounds=params.v_bounds,
        u_bounds=params.u_bounds,
    )
    game = LqGame(
        A=A,
        B=B,
        Q=tuple(np.eye(n) for _ in range(num_agents)),
        R=tuple(np.eye(1) for _ in range(num_agents)),
        constraints=constraints,
    )
    game = prestabilize(game, stabilizer_gains(num_agents))
    logs(
        f"Platoon of {num_agents} vehicles: n={n}, {constraints.num_state_rows} state rows "
        f"and {constraints.num_input_rows} input rows per stage",
        context=ScenarioType.PLATOONING.value,
    )
    return Scenario(
        kind=ScenarioType.PLATOONING,
        game=game,
        predecessor=predecessor,
        order=order,
        gap_index=gap_index,
        speed_index=speed_index,
        standoff=params.standoff,
        headway=params.headway,
        v_ref=params.v_ref,
        tau_s=params.tau_s,
        positions=params.positions,
        velocities=params.velocities,
    )


def build_platooning(params: PlatooningParams) -> tuple[LqGame, Vector]:
    """Pre-stabilized platooning game and its initial state."""
    scenario = platooning_scenario(params)
    return scenario.game, scenario.x0
