"""Linear-quadratic games, their constraints and the stacked finite-horizon form."""

from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np

from avi_games.data_structures.constants import PSD_TOL
from avi_games.data_structures.enums import ConstraintClass
from avi_games.data_structures.models import AviProblem, Matrix, Vector, as_matrix, as_vector
from avi_games.games.exceptions import InvalidGame


def _matrices(values: Sequence[Any], name: str) -> tuple[Matrix, ...]:
    try:
        return tuple(as_matrix(value, f"{name}[{index}]") for index, value in enumerate(values))
    except ValueError as err:
        raise InvalidGame(str(err)) from err


def _labels(values: Sequence[Any], rows: int, name: str) -> tuple[ConstraintClass, ...]:
    labels = tuple(ConstraintClass(value) for value in values)
    if len(labels) != rows:
        raise InvalidGame(f"{name} has {len(labels)} labels for {rows} rows")
    return labels


@dataclass(frozen=True, eq=False)
class ConstraintSpec:
    """Stage constraints of a game.

    Input rows ``E x[t] + sum_j D_j u_j[t] + d_u <= 0`` hold at stages ``0..T-1``, state rows
    ``D_x x[t] + d_x <= 0`` at stages ``1..T``. The state coefficient ``E`` of the input rows is
    what lets bounds on the physically applied input survive pre-stabilization.

    ``collision_gap`` marks a ``GAP`` row value at or above it as a collision (the physical
    distance is nonpositive).
    """

    input_state: Matrix
    input_coupling: tuple[Matrix, ...]
    input_offset: Vector
    state_rows: Matrix
    state_offset: Vector
    input_labels: tuple[ConstraintClass, ...] = ()
    state_labels: tuple[ConstraintClass, ...] = ()
    collision_gap: float | None = None

    def __post_init__(self) -> None:
        n = as_matrix(self.state_rows, "state_rows").shape[1]
        input_state = as_matrix(self.input_state, "input_state", columns=n)
        coupling = _matrices(self.input_coupling, "input_coupling")
        rows = input_state.shape[0]
        input_offset = as_vector(self.input_offset, "input_offset")
        state_rows = as_matrix(self.state_rows, "state_rows")
        state_offset = as_vector(self.state_offset, "state_offset")

        if input_state.shape[1] != n:
            raise InvalidGame(f"input_state has {input_state.shape[1]} columns, expected {n}")
        if input_offset.shape[0] != rows:
            raise InvalidGame(f"input_offset has length {input_offset.shape[0]}, expected {rows}")
        for index, block in enumerate(coupling):
            if block.shape[0] != rows:
                raise InvalidGame(f"input_coupling[{index}] has {block.shape[0]} rows, not {rows}")
        if state_offset.shape[0] != state_rows.shape[0]:
            raise InvalidGame(
                f"state_offset has length {state_offset.shape[0]}, "
                f"expected {state_rows.shape[0]}"
            )

        input_labels = self.input_labels or (ConstraintClass.INPUT,) * rows
        state_labels = self.state_labels or (ConstraintClass.STATE,) * state_rows.shape[0]
        object.__setattr__(self, "input_state", input_state)
        object.__setattr__(self, "input_coupling", coupling)
        object.__setattr__(self, "input_offset", input_offset)
        object.__setattr__(self, "state_rows", state_rows)
        object.__setattr__(self, "state_offset", state_offset)
        object.__setattr__(self, "input_labels", _labels(input_labels, rows, "input rows"))
        object.__setattr__(
            self, "state_labels", _labels(state_labels, state_rows.shape[0], "state rows")
        )

    @property
    def n(self) -> int:
        return int(self.state_rows.shape[1])

    @property
    def input_dims(self) -> tuple[int, ...]:
        return tuple(int(block.shape[1]) for block in self.input_coupling)

    @property
    def num_input_rows(self) -> int:
        return int(self.input_offset.shape[0])

    @property
    def num_state_rows(self) -> int:
        return int(self.state_offset.shape[0])

    @classmethod
    def unconstrained(cls, n: int, input_dims: Sequence[int]) -> "ConstraintSpec":
        return cls(
            input_state=np.zeros((0, n)),
            input_coupling=tuple(np.zeros((0, dim)) for dim in input_dims),
            input_offset=np.zeros(0),
            state_rows=np.zeros((0, n)),
            state_offset=np.zeros(0),
        )

    @classmethod
    def from_bounds(
        cls,
        n: int,
        input_dims: Sequence[int],
        input_lower: float,
        input_upper: float,
        state_lower: Vector | None = None,
        state_upper: Vector | None = None,
    ) -> "ConstraintSpec":
        """Box on every input component and, optionally, on state components.

        Infinite state bounds produce no row.
        """
        total = sum(input_dims)
        eye = np.eye(total)
        stacked = np.vstack([eye, -eye])
        splits = np.cumsum(input_dims)[:-1]
        coupling = tuple(np.split(stacked, splits, axis=1))

        state_rows: list[Vector] = []
        state_offset: list[float] = []
        for index in range(n):
            unit = np.eye(n)[index]
            if state_upper is not None and np.isfinite(state_upper[index]):
                state_rows.append(unit)
                state_offset.append(-state_upper[index])
            if state_lower is not None and np.isfinite(state_lower[index]):
                state_rows.append(-unit)
                state_offset.append(state_lower[index])

        return cls(
            input_state=np.zeros((2 * total, n)),
            input_coupling=coupling,
            input_offset=np.concatenate(
                [np.full(total, -input_upper), np.full(total, input_lower)]
            ),
            state_rows=np.array(state_rows).reshape(len(state_rows), n),
            state_offset=np.array(state_offset),
        )

    def input_values(self, x: Vector, u: Vector) -> Vector:
        """Values of the input rows at one stage. ``u`` is the stacked input of all agents."""
        coupling = np.hstack(self.input_coupling) if self.input_coupling else np.zeros((0, 0))
        return self.input_state @ x + coupling @ u + self.input_offset

    def state_values(self, x: Vector) -> Vector:
        return self.state_rows @ x + self.state_offset


@dataclass(frozen=True, eq=False)
class LqGame:
    """``x[t+1] = A x[t] + sum_i B_i u_i[t]`` with quadratic stage costs ``x'Q_i x + u_i'R_i u_i``.

    ``stabilizer_gains`` is set by pre-stabilization: the physically applied input of agent ``i``
    is then ``K_i x + u_i`` and ``A`` already contains ``sum_i B_i K_i``.
    """

    A: Matrix
    B: tuple[Matrix, ...]
    Q: tuple[Matrix, ...]
    R: tuple[Matrix, ...]
    constraints: ConstraintSpec
    stabilizer_gains: tuple[Matrix, ...] | None = None

    def __post_init__(self) -> None:
        try:
            A = as_matrix(self.A, "A")
        except ValueError as err:
            raise InvalidGame(str(err)) from err
        B, Q, R = _matrices(self.B, "B"), _matrices(self.Q, "Q"), _matrices(self.R, "R")
        n = A.shape[0]

        if A.shape != (n, n):
            raise InvalidGame(f"A must be square, got {A.shape}")
        if not B or not len(B) == len(Q) == len(R):
            raise InvalidGame(
                f"Got {len(B)} input, {len(Q)} state cost and {len(R)} input cost matrices"
            )
        for index, (b, q, r) in enumerate(zip(B, Q, R)):
            if b.shape[0] != n:
                raise InvalidGame(f"B[{index}] has {b.shape[0]} rows, expected {n}")
            if q.shape != (n, n):
                raise InvalidGame(f"Q[{index}] must be {n}x{n}, got {q.shape}")
            if r.shape != (b.shape[1], b.shape[1]):
                raise InvalidGame(f"R[{index}] must be {b.shape[1]}x{b.shape[1]}, got {r.shape}")
            if np.linalg.eigvalsh((q + q.T) / 2).min() < -PSD_TOL:
                raise InvalidGame(f"Q[{index}] is not positive semidefinite")
            if not np.linalg.eigvalsh((r + r.T) / 2).min() > 0:
                raise InvalidGame(f"R[{index}] is not positive definite")

        input_dims = tuple(b.shape[1] for b in B)
        if self.constraints.n != n or self.constraints.input_dims != input_dims:
            raise InvalidGame(
                f"Constraints are posed for n={self.constraints.n}, inputs "
                f"{self.constraints.input_dims}; the game has n={n}, inputs {input_dims}"
            )

        gains = None
        if self.stabilizer_gains is not None:
            gains = _matrices(self.stabilizer_gains, "stabilizer_gains")
            if tuple(gain.shape for gain in gains) != tuple((dim, n) for dim in input_dims):
                raise InvalidGame("Stabilizer gains must be m_i x n for every agent")

        object.__setattr__(self, "A", A)
        object.__setattr__(self, "B", B)
        object.__setattr__(self, "Q", Q)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "stabilizer_gains", gains)

    @property
    def n(self) -> int:
        return int(self.A.shape[0])

    @property
    def num_agents(self) -> int:
        return len(self.B)

    @property
    def input_dims(self) -> tuple[int, ...]:
        return tuple(int(b.shape[1]) for b in self.B)

    @property
    def B_stacked(self) -> Matrix:
        return np.hstack(self.B)

    @property
    def stacked_gain(self) -> Matrix:
        """``col(K_i)`` of the pre-stabilizer (zeros if there is none)."""
        if self.stabilizer_gains is None:
            return np.zeros((sum(self.input_dims), self.n))
        return np.vstack(self.stabilizer_gains)

    @property
    def open_loop_A(self) -> Matrix:
        """State matrix of the plant without the pre-stabilizing feedback."""
        return self.A - self.B_stacked @ self.stacked_gain

    def applied_inputs(self, x: Vector, u: Vector) -> Vector:
        return self.stacked_gain @ x + u

    def step(self, x: Vector, u: Vector) -> Vector:
        return self.A @ x + self.B_stacked @ u


@dataclass(frozen=True, eq=False)
class RiccatiSolution:
    P: tuple[Matrix, ...]
    K: tuple[Matrix, ...]
    A_cl: Matrix
    P_hat: tuple[Matrix, ...]
    """Solutions of the per-agent augmented (2n x 2n) Riccati equations."""
    K_hat: tuple[Matrix, ...]
    terminal_cost: tuple[Matrix, ...]
    residual: float = 0.0

    @property
    def spectral_radius(self) -> float:
        return float(np.abs(np.linalg.eigvals(self.A_cl)).max())


@dataclass(frozen=True, eq=False)
class StackedGame:
    """A game stacked over ``horizon`` stages.

    Agent inputs are stacked agent-major: ``u = col(u_1, ..., u_N)`` with
    ``u_i = col(u_i[0], ..., u_i[T-1])``. Constraint rows hold the input rows of stages
    ``0..T-1`` followed by the state rows of stages ``1..T``. Only ``q`` and ``d`` depend on
    the initial state, both affinely.
    """

    game: LqGame
    horizon: int
    riccati: RiccatiSolution
    Theta: Matrix
    Gamma: tuple[Matrix, ...]
    Q_bar: tuple[Matrix, ...]
    R_bar: tuple[Matrix, ...]
    M: Matrix
    q_x0: Matrix
    D: Matrix
    d_const: Vector
    d_x0: Matrix
    row_labels: tuple[ConstraintClass, ...]
    row_stages: tuple[int, ...]
    _offsets: tuple[int, ...] = field(init=False, repr=False)

    def __post_init__(self) -> None:
        dims = [dim * self.horizon for dim in self.game.input_dims]
        object.__setattr__(self, "_offsets", tuple(np.concatenate([[0], np.cumsum(dims)])))

    @property
    def num_variables(self) -> int:
        return int(self.M.shape[0])

    def agent_slice(self, agent: int) -> slice:
        return slice(self._offsets[agent], self._offsets[agent + 1])

    def input_blocks(self, u: Vector) -> list[Matrix]:
        """Per agent, the ``T x m_i`` matrix of stage inputs."""
        return [
            u[self.agent_slice(agent)].reshape(self.horizon, dim)
            for agent, dim in enumerate(self.game.input_dims)
        ]

    def stage_inputs(self, u: Vector, stage: int) -> Vector:
        """Stacked input of all agents at one stage."""
        return np.concatenate([block[stage] for block in self.input_blocks(u)])

    def first_inputs(self, u: Vector) -> Vector:
        return self.stage_inputs(u, 0)

    def q_at(self, x0: Vector) -> Vector:
        return self.q_x0 @ x0

    def d_at(self, x0: Vector) -> Vector:
        return self.d_const + self.d_x0 @ x0

    def problem_at(self, x0: Vector) -> AviProblem:
        x0 = as_vector(x0, "x0")
        if x0.shape != (self.game.n,):
            raise InvalidGame(f"Initial state has shape {x0.shape}, expected ({self.game.n},)")
        return AviProblem.from_arrays(M=self.M, q=self.q_at(x0), D=self.D, d=self.d_at(x0))
