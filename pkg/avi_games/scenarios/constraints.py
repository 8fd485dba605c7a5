"""Stage constraints shared by the vehicle scenarios, written in the game's error coordinates.

With ``S`` the velocity rows (``v = v_ref - S x``) and ``e_i`` vehicle ``i``'s gap error, the
physical gap to the predecessor is ``e_i + d_i + h_i (v_ref - S_i x)``. Gap rows hold the value
``d_min - gap``, which is why a value of ``d_min`` or more means the vehicles touch.
"""

from collections.abc import Sequence

import numpy as np

from avi_games.data_structures.enums import ConstraintClass
from avi_games.data_structures.models import Matrix, Vector
from avi_games.games.models import ConstraintSpec


def velocity_rows(
    n: int,
    predecessor: Sequence[int | None],
    order: Sequence[int],
    speed_index: Sequence[int],
) -> Matrix:
    """Row ``i`` adds up the velocity errors on the chain from vehicle ``i`` to its leader."""
    rows = np.zeros((len(predecessor), n))
    for vehicle in order:
        parent = predecessor[vehicle]
        if parent is not None:
            rows[vehicle] = rows[parent]
        rows[vehicle, speed_index[vehicle]] += 1.0
    return rows


def chain_constraints(
    S: Matrix,
    predecessor: Sequence[int | None],
    gap_index: Sequence[int | None],
    standoff: Vector,
    headway: Vector,
    v_ref: float,
    d_min: float,
    v_bounds: tuple[float, float],
    u_bounds: tuple[float, float],
) -> ConstraintSpec:
    """Minimum gap for every follower, velocity bounds for every vehicle and a box on every
    (scalar) applied input.
    """
    num_vehicles, n = S.shape
    v_min, v_max = v_bounds
    u_min, u_max = u_bounds

    rows: list[Vector] = []
    offsets: list[float] = []
    labels: list[ConstraintClass] = []
    for vehicle, parent in enumerate(predecessor):
        slot = gap_index[vehicle]
        if parent is None or slot is None:
            continue
        row = headway[vehicle] * S[vehicle]
        row[slot] -= 1.0
        rows.append(row)
        offsets.append(d_min - standoff[vehicle] - headway[vehicle] * v_ref)
        labels.append(ConstraintClass.GAP)

    for vehicle in range(num_vehicles):
        rows.extend([-S[vehicle], S[vehicle]])
        offsets.extend([v_ref - v_max, v_min - v_ref])
        labels.extend([ConstraintClass.VELOCITY] * 2)

    eye = np.eye(num_vehicles)
    coupling = np.vstack([eye, -eye])
    return ConstraintSpec(
        input_state=np.zeros((2 * num_vehicles, n)),
        input_coupling=tuple(coupling[:, [agent]] for agent in range(num_vehicles)),
        input_offset=np.concatenate(
            [np.full(num_vehicles, -u_max), np.full(num_vehicles, u_min)]
        ),
        state_rows=np.array(rows).reshape(len(rows), n),
        state_offset=np.array(offsets),
        state_labels=tuple(labels),
        collision_gap=d_min,
    )
