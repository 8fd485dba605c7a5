"""Compiles an LQ game over a finite horizon into an affine variational inequality.

For horizon ``T`` the predicted states are ``X = Theta x0 + sum_i Gamma_i u_i`` and agent ``i``
minimizes ``J_i = 1/2 X' Q_bar_i X + 1/2 u_i' R_bar_i u_i``. Stacking the partial gradients
gives ``F(u) = Mu + q(x0)`` with

    M = blkdiag(R_bar_i) + [Gamma_i' Q_bar_i Gamma_j]_ij,   q(x0) = col(Gamma_i' Q_bar_i Theta x0).
"""

import logging
import warnings
from collections.abc import Sequence

import numpy as np
import scipy.linalg

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import RICCATI_MAX_ITER, RICCATI_TOL
from avi_games.data_structures.enums import ConstraintClass
from avi_games.data_structures.models import AviProblem, Matrix, PolyhedralSet, Vector
from avi_games.games.exceptions import InvalidGame, NonMonotoneOperator
from avi_games.games.models import ConstraintSpec, LqGame, RiccatiSolution, StackedGame
from avi_games.games.riccati import solve_riccati
from avi_games.vi_core.operations import strong_monotonicity_modulus

logger = logging.getLogger(__name__)

ConstraintMaps = tuple[Matrix, Vector, Matrix, tuple[ConstraintClass, ...], tuple[int, ...]]
"""``(D, d_const, d_x0, row labels, row stages)`` with ``d(x0) = d_const + d_x0 x0``."""


def _check_horizon(horizon: int) -> None:
    if horizon < 1:
        raise InvalidGame(f"Horizon must be at least 1, got {horizon=}")


def build_prediction_matrices(game: LqGame, horizon: int) -> tuple[Matrix, list[Matrix]]:
    """``Theta = [A; A^2; ...; A^T]`` and lower block-triangular ``Gamma_i`` with blocks
    ``A^(t-s) B_i`` (block row ``t`` predicts ``x[t+1]``).
    """
    _check_horizon(horizon)
    n = game.n
    powers = [np.eye(n)]
    for _ in range(horizon):
        powers.append(game.A @ powers[-1])

    Theta = np.vstack(powers[1:])
    Gamma = []
    for b in game.B:
        dim = b.shape[1]
        block = np.zeros((n * horizon, dim * horizon))
        for t in range(horizon):
            for s in range(t + 1):
                block[t * n : (t + 1) * n, s * dim : (s + 1) * dim] = powers[t - s] @ b
        Gamma.append(block)
    return Theta, Gamma


def _stage_block(matrix: Matrix, stage: int, n: int) -> Matrix:
    """Rows of a prediction matrix that give ``x[stage]`` (``stage >= 1``)."""
    return matrix[(stage - 1) * n : stage * n]


def stack_constraint_maps(
    spec: ConstraintSpec, Theta: Matrix, Gamma: Sequence[Matrix], horizon: int
) -> ConstraintMaps:
    """Stage constraints of the whole horizon as rows in the stacked input."""
    n = spec.n
    input_dims = spec.input_dims
    G = np.hstack(Gamma)
    offsets = np.concatenate([[0], np.cumsum([dim * horizon for dim in input_dims])])

    D_rows: list[Matrix] = []
    d_const: list[Vector] = []
    d_x0: list[Matrix] = []
    labels: list[ConstraintClass] = []
    stages: list[int] = []

    for stage in range(horizon):
        rows = np.zeros((spec.num_input_rows, G.shape[1]))
        for agent, (block, dim) in enumerate(zip(spec.input_coupling, input_dims)):
            start = offsets[agent] + stage * dim
            rows[:, start : start + dim] = block
        if stage == 0:
            state_map = spec.input_state
        else:
            rows += spec.input_state @ _stage_block(G, stage, n)
            state_map = spec.input_state @ _stage_block(Theta, stage, n)
        D_rows.append(rows)
        d_const.append(spec.input_offset)
        d_x0.append(state_map)
        labels.extend(spec.input_labels)
        stages.extend([stage] * spec.num_input_rows)

    for stage in range(1, horizon + 1):
        D_rows.append(spec.state_rows @ _stage_block(G, stage, n))
        d_const.append(spec.state_offset)
        d_x0.append(spec.state_rows @ _stage_block(Theta, stage, n))
        labels.extend(spec.state_labels)
        stages.extend([stage] * spec.num_state_rows)

    return (
        np.vstack(D_rows),
        np.concatenate(d_const),
        np.vstack(d_x0),
        tuple(labels),
        tuple(stages),
    )


def stack_constraints(
    spec: ConstraintSpec, Theta: Matrix, Gamma: Sequence[Matrix], horizon: int, x0: Vector
) -> PolyhedralSet:
    D, d_const, d_x0, _, _ = stack_constraint_maps(spec, Theta, Gamma, horizon)
    return PolyhedralSet(D=D, d=d_const + d_x0 @ x0)


def prestabilize(game: LqGame, gains: Sequence[Matrix]) -> LqGame:
    """Closes the loop with ``u_i_applied = K_i x + u_i``.

    The state matrix becomes ``A + sum_i B_i K_i`` and input rows keep bounding the applied
    input, so their state coefficient becomes ``E + sum_j D_j K_j``. Gains accumulate if the
    game already has a pre-stabilizer.
    """
    gains = [np.asarray(gain, dtype=float) for gain in gains]
    expected = [(dim, game.n) for dim in game.input_dims]
    if [gain.shape for gain in gains] != expected:
        raise InvalidGame(f"Stabilizer gains must have shapes {expected}")

    spec = game.constraints
    feedback = sum((b @ gain for b, gain in zip(game.B, gains)), np.zeros((game.n, game.n)))
    input_feedback = sum(
        (block @ gain for block, gain in zip(spec.input_coupling, gains)),
        np.zeros_like(spec.input_state),
    )
    previous = game.stabilizer_gains or tuple(np.zeros(shape) for shape in expected)

    constraints = ConstraintSpec(
        input_state=spec.input_state + input_feedback,
        input_coupling=spec.input_coupling,
        input_offset=spec.input_offset,
        state_rows=spec.state_rows,
        state_offset=spec.state_offset,
        input_labels=spec.input_labels,
        state_labels=spec.state_labels,
        collision_gap=spec.collision_gap,
    )
    return LqGame(
        A=game.A + feedback,
        B=game.B,
        Q=game.Q,
        R=game.R,
        constraints=constraints,
        stabilizer_gains=tuple(old + new for old, new in zip(previous, gains)),
    )


def compile_game(
    game: LqGame,
    horizon: int,
    riccati: RiccatiSolution | None = None,
    riccati_tol: float = RICCATI_TOL,
    riccati_max_iter: int = RICCATI_MAX_ITER,
) -> StackedGame:
    """Everything of the AVI that does not depend on the initial state.

    Warns with ``NonMonotoneOperator`` if ``M`` is not strongly monotone.
    """
    _check_horizon(horizon)
    if riccati is None:
        riccati = solve_riccati(game, riccati_tol, riccati_max_iter)

    Theta, Gamma = build_prediction_matrices(game, horizon)
    G = np.hstack(Gamma)
    Q_bar = [
        scipy.linalg.block_diag(*([q] * (horizon - 1) + [terminal]))
        for q, terminal in zip(game.Q, riccati.terminal_cost)
    ]
    R_bar = [np.kron(np.eye(horizon), r) for r in game.R]

    M = scipy.linalg.block_diag(*R_bar) + np.vstack(
        [gamma.T @ q_bar @ G for gamma, q_bar in zip(Gamma, Q_bar)]
    )
    q_x0 = np.vstack([gamma.T @ q_bar @ Theta for gamma, q_bar in zip(Gamma, Q_bar)])
    D, d_const, d_x0, labels, stages = stack_constraint_maps(
        game.constraints, Theta, Gamma, horizon
    )

    modulus = strong_monotonicity_modulus(M)
    if modulus <= 0:
        warnings.warn(
            f"Game operator is not strongly monotone (modulus {modulus:.3e})",
            NonMonotoneOperator,
            stacklevel=2,
        )
    logs(
        f"Compiled {game.num_agents}-agent game over {horizon=}: {M.shape[0]} variables, "
        f"{D.shape[0]} constraint rows, monotonicity modulus {modulus:.3e}",
        context="compiler",
    )

    return StackedGame(
        game=game,
        horizon=horizon,
        riccati=riccati,
        Theta=Theta,
        Gamma=tuple(Gamma),
        Q_bar=tuple(Q_bar),
        R_bar=tuple(R_bar),
        M=M,
        q_x0=q_x0,
        D=D,
        d_const=d_const,
        d_x0=d_x0,
        row_labels=labels,
        row_stages=stages,
    )


def assemble_avi(
    game: LqGame, horizon: int, riccati: RiccatiSolution, x0: Vector
) -> AviProblem:
    return compile_game(game, horizon, riccati).problem_at(x0)


def predict_states(stacked: StackedGame, x0: Vector, u: Vector) -> Matrix:
    """Predicted ``x[1..T]`` as a ``T x n`` matrix."""
    X = stacked.Theta @ x0 + np.hstack(stacked.Gamma) @ u
    return X.reshape(stacked.horizon, stacked.game.n)


def agent_costs(stacked: StackedGame, u: Vector, x0: Vector) -> Vector:
    """Finite-horizon cost of every agent for the stacked input ``u``."""
    X = stacked.Theta @ x0 + np.hstack(stacked.Gamma) @ u
    costs = []
    for agent, (q_bar, r_bar) in enumerate(zip(stacked.Q_bar, stacked.R_bar)):
        u_i = u[stacked.agent_slice(agent)]
        costs.append(0.5 * X @ q_bar @ X + 0.5 * u_i @ r_bar @ u_i)
    return np.array(costs)
