"""Coupled Riccati equations of the open-loop game and the per-agent augmented equations.

The coupled equations

    P_i = Q_i + A' P_i (A + sum_j B_j K_j)
    K_i = -R_i^-1 B_i' P_i (A + sum_j B_j K_j)

are solved directly from the stable deflating subspace of the state/costate pencil, then
checked (and if needed refined) by alternating two exact linear solves: the gains for fixed
``P`` (one stacked system) and the ``P_i`` for fixed gains (Stein equations sharing one
Kronecker operator). The alternation alone is the fallback when the pencil gives no solution.
"""

import logging
from collections.abc import Callable

import numpy as np
import scipy.linalg

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import (
    RICCATI_MAX_ITER,
    RICCATI_SUBSPACE_MAX_COND,
    RICCATI_TOL,
)
from avi_games.data_structures.enums import LoggingLevel
from avi_games.data_structures.models import Matrix
from avi_games.games.exceptions import NoStabilizingSolution
from avi_games.games.models import LqGame, RiccatiSolution

logger = logging.getLogger(__name__)

AugmentedSystem = tuple[Matrix, Matrix, Matrix]
CoupledSolution = tuple[list[Matrix], list[Matrix], Matrix]


def _relative(residual: Matrix, reference: Matrix) -> float:
    return float(np.linalg.norm(residual) / max(1.0, np.linalg.norm(reference)))


def _dare_or_none(A: Matrix, B: Matrix, Q: Matrix, R: Matrix) -> Matrix | None:
    try:
        P = scipy.linalg.solve_discrete_are(A, B, Q, R)
    except (np.linalg.LinAlgError, ValueError):
        return None
    return P if np.all(np.isfinite(P)) else None


def spectral_radius(matrix: Matrix) -> float:
    return float(np.abs(np.linalg.eigvals(matrix)).max(initial=0.0))


def feedback_gains(game: LqGame, P: list[Matrix]) -> list[Matrix]:
    """Solves ``R_i K_i + B_i' P_i sum_j B_j K_j = -B_i' P_i A`` for all agents at once."""
    B_all = game.B_stacked
    system = scipy.linalg.block_diag(*game.R) + np.vstack(
        [b.T @ p @ B_all for b, p in zip(game.B, P)]
    )
    rhs = -np.vstack([b.T @ p @ game.A for b, p in zip(game.B, P)])
    try:
        stacked = np.linalg.solve(system, rhs)
    except np.linalg.LinAlgError as err:
        raise NoStabilizingSolution("Riccati gain equations are singular") from err
    return np.split(stacked, np.cumsum(game.input_dims)[:-1], axis=0)


def stein_solutions(A: Matrix, A_cl: Matrix, Q: tuple[Matrix, ...]) -> list[Matrix]:
    """``P_i`` with ``P_i - A' P_i A_cl = Q_i``, vectorized row-major as
    ``(I - A' kron A_cl') vec(P_i) = vec(Q_i)``.
    """
    n = A.shape[0]
    operator = np.eye(n * n) - np.kron(A.T, A_cl.T)
    rhs = np.column_stack([q.ravel() for q in Q])
    try:
        solution = np.linalg.solve(operator, rhs)
    except np.linalg.LinAlgError as err:
        raise NoStabilizingSolution("Stein equation is singular") from err
    if not np.all(np.isfinite(solution)):
        raise NoStabilizingSolution("Stein equation has no finite solution")
    return [solution[:, index].reshape(n, n) for index in range(len(Q))]


def closed_loop(game: LqGame, K: list[Matrix]) -> Matrix:
    return game.A + game.B_stacked @ np.vstack(K)


def coupled_residual(game: LqGame, P: list[Matrix], K: list[Matrix]) -> float:
    """Largest relative Frobenius residual of both coupled equations over all agents."""
    A_cl = closed_loop(game, K)
    residuals = []
    for b, q, r, p, k in zip(game.B, game.Q, game.R, P, K):
        residuals.append(_relative(p - q - game.A.T @ p @ A_cl, p))
        residuals.append(_relative(r @ k + b.T @ p @ A_cl, k))
    return max(residuals)


def solve_coupled_riccati_qz(game: LqGame) -> list[Matrix]:
    """``P_i`` from the stable deflating subspace of the open-loop Nash pencil.

    With ``S_j = B_j R_j^-1 B_j'`` the state and costates ``psi_i = P_i x`` follow

        x[t+1] + sum_j S_j psi_j[t+1] = A x[t]
        A' psi_i[t+1] = psi_i[t] - Q_i x[t]

    The pencil needs exactly ``n`` generalized eigenvalues inside the unit circle. If
    ``[X; Psi_1; ...; Psi_N]`` spans their subspace, ``P_i = Psi_i X^-1``.
    """
    n, N = game.n, game.num_agents
    size = n * (N + 1)
    E, F = np.eye(size), np.zeros((size, size))
    F[:n, :n] = game.A
    for agent, (b, q, r) in enumerate(zip(game.B, game.Q, game.R)):
        rows = slice(n * (agent + 1), n * (agent + 2))
        E[:n, rows] = b @ np.linalg.solve(r, b.T)
        E[rows, rows] = game.A.T
        F[rows, :n] = -q
        F[rows, rows] = np.eye(n)

    try:
        _, _, alpha, beta, _, Z = scipy.linalg.ordqz(F, E, sort="iuc", output="real")
    except (np.linalg.LinAlgError, ValueError) as err:
        raise NoStabilizingSolution(f"QZ decomposition failed: {err}") from err

    stable = int(np.count_nonzero(np.abs(alpha) < np.abs(beta)))
    if stable != n:
        raise NoStabilizingSolution(
            f"Pencil has {stable} stable eigenvalues, a unique stabilizing solution needs {n}"
        )
    X = Z[:n, :n]
    condition = np.linalg.cond(X)
    if not condition < RICCATI_SUBSPACE_MAX_COND:
        raise NoStabilizingSolution(f"Stable subspace is not a graph over x ({condition=:.2e})")
    return [
        np.linalg.solve(X.T, Z[n * (agent + 1) : n * (agent + 2), :n].T).T for agent in range(N)
    ]


def zero_gain_start(game: LqGame) -> list[Matrix]:
    """``P_i`` of ``K = 0``, i.e. ``P_i = Q_i + A' P_i A``. Needs a Schur-stable ``A``."""
    return stein_solutions(game.A, game.A, game.Q)


def individual_lqr_start(game: LqGame) -> list[Matrix]:
    """Every agent's own DARE solution, ``Q_i`` where that does not exist."""
    P = []
    for b, q, r in zip(game.B, game.Q, game.R):
        individual = _dare_or_none(game.A, b, q, r)
        P.append(individual if individual is not None else q.copy())
    return P


def iterate_coupled_riccati(
    game: LqGame, P: list[Matrix], tol: float = RICCATI_TOL, max_iter: int = RICCATI_MAX_ITER
) -> tuple[CoupledSolution, int]:
    """Alternates gains and Stein solves from ``P`` until the residual is at most ``tol``.

    Returns the solution and the number of Stein solves it took (0 if ``P`` already solves the
    equations).
    """
    K = feedback_gains(game, P)
    residual = coupled_residual(game, P, K)
    iteration = 0
    while residual > tol:
        if iteration == max_iter:
            raise NoStabilizingSolution(
                f"Coupled Riccati iteration did not reach {tol=} in {max_iter} iterations "
                f"(last residual {residual:.3e})"
            )
        iteration += 1
        P = stein_solutions(game.A, closed_loop(game, K), game.Q)
        K = feedback_gains(game, P)
        residual = coupled_residual(game, P, K)
        if logger.isEnabledFor(logging.DEBUG):
            logs(f"{iteration=} {residual=:.3e}", level=LoggingLevel.DEBUG, context="riccati")
    return (P, K, closed_loop(game, K)), iteration


def solve_coupled_riccati(
    game: LqGame, tol: float = RICCATI_TOL, max_iter: int = RICCATI_MAX_ITER
) -> CoupledSolution:
    """Returns ``(P, K, A_cl)``.

    Starts from the deflating-subspace solution. If that fails, the alternating iteration runs
    from ``K = 0`` when ``A`` is Schur stable and from the individual LQR solutions otherwise.
    """
    starts: list[tuple[str, Callable[[LqGame], list[Matrix]]]] = [
        ("deflating subspace", solve_coupled_riccati_qz)
    ]
    if spectral_radius(game.A) < 1:
        starts.append(("zero gains", zero_gain_start))
    else:
        starts.append(("individual LQR solutions", individual_lqr_start))

    failures = []
    for label, start in starts:
        try:
            (P, K, A_cl), iterations = iterate_coupled_riccati(game, start(game), tol, max_iter)
        except NoStabilizingSolution as err:
            failures.append(f"{label}: {err}")
            logs(
                f"Start from {label} failed: {err}", level=LoggingLevel.WARNING, context="riccati"
            )
            continue

        radius = spectral_radius(A_cl)
        if radius >= 1:
            failures.append(f"{label}: fixed point is not stabilizing ({radius=:.4f})")
            continue
        logs(
            f"Coupled Riccati solved from {label} with {iterations} refining iterations, "
            f"residual {coupled_residual(game, P, K):.2e}, closed-loop spectral radius "
            f"{radius:.4f}",
            context="riccati",
        )
        return P, K, A_cl

    raise NoStabilizingSolution("No stabilizing coupled Riccati solution: " + "; ".join(failures))


def build_augmented_system(
    game: LqGame, K: list[Matrix], A_cl: Matrix, agent: int
) -> AugmentedSystem:
    """System of agent ``agent`` deviating while all others keep playing their gains.

    ``A_hat = [[A, sum_{j != i} B_j K_j], [0, A_cl]]``, ``B_hat = [B_i; 0]``,
    ``Q_hat = blkdiag(Q_i, 0)``.
    """
    n = game.n
    others = sum(
        (b @ k for index, (b, k) in enumerate(zip(game.B, K)) if index != agent),
        np.zeros((n, n)),
    )
    A_hat = np.block([[game.A, others], [np.zeros((n, n)), A_cl]])
    B_hat = np.vstack([game.B[agent], np.zeros((n, game.input_dims[agent]))])
    Q_hat = scipy.linalg.block_diag(game.Q[agent], np.zeros((n, n)))
    return A_hat, B_hat, Q_hat


def _dare_gain(A: Matrix, B: Matrix, R: Matrix, P: Matrix) -> Matrix:
    return -np.linalg.solve(R + B.T @ P @ B, B.T @ P @ A)


def augmented_residual(A: Matrix, B: Matrix, Q: Matrix, R: Matrix, P: Matrix) -> float:
    return _relative(P - Q - A.T @ P @ (A + B @ _dare_gain(A, B, R, P)), P)


def _dare_by_value_iteration(
    A: Matrix, B: Matrix, Q: Matrix, R: Matrix, P: Matrix, tol: float, max_iter: int
) -> Matrix:
    for _ in range(max_iter):
        following = Q + A.T @ P @ (A + B @ _dare_gain(A, B, R, P))
        following = (following + following.T) / 2
        if _relative(following - P, following) <= tol:
            return following
        P = following
    raise NoStabilizingSolution(f"Augmented Riccati equation did not converge in {max_iter} steps")


def solve_augmented_riccati(
    A_hat: Matrix,
    B_hat: Matrix,
    Q_hat: Matrix,
    R: Matrix,
    tol: float = RICCATI_TOL,
    max_iter: int = RICCATI_MAX_ITER,
) -> tuple[Matrix, Matrix]:
    """Stabilizing solution ``(P_hat, K_hat)`` of the single-agent augmented DARE.

    Solved with the Schur method and polished by value iteration if its residual is above
    ``tol``. Value iteration from ``Q_hat`` replaces it when the Schur method fails.
    """
    P_hat = _dare_or_none(A_hat, B_hat, Q_hat, R)
    if P_hat is None:
        logs(
            "Schur solution of the augmented Riccati equation failed, using value iteration",
            level=LoggingLevel.WARNING,
        )
        P_hat = _dare_by_value_iteration(A_hat, B_hat, Q_hat, R, Q_hat.copy(), tol, max_iter)
    elif augmented_residual(A_hat, B_hat, Q_hat, R, P_hat) > tol:
        P_hat = _dare_by_value_iteration(A_hat, B_hat, Q_hat, R, P_hat, tol, max_iter)

    P_hat = (P_hat + P_hat.T) / 2
    return P_hat, _dare_gain(A_hat, B_hat, R, P_hat)


def terminal_cost_matrix(P_hat: Matrix) -> Matrix:
    """``E' P_hat E`` with ``E = [I; I]``: at the terminal stage both augmented halves are x[T]."""
    n = P_hat.shape[0] // 2
    E = np.vstack([np.eye(n), np.eye(n)])
    terminal = E.T @ P_hat @ E
    return (terminal + terminal.T) / 2


def solve_riccati(
    game: LqGame, tol: float = RICCATI_TOL, max_iter: int = RICCATI_MAX_ITER
) -> RiccatiSolution:
    """Coupled gains plus, for every agent, the augmented solution and terminal cost."""
    P, K, A_cl = solve_coupled_riccati(game, tol, max_iter)
    P_hat, K_hat, terminal = [], [], []
    for agent in range(game.num_agents):
        A_hat, B_hat, Q_hat = build_augmented_system(game, K, A_cl, agent)
        p_hat, k_hat = solve_augmented_riccati(A_hat, B_hat, Q_hat, game.R[agent], tol, max_iter)
        P_hat.append(p_hat)
        K_hat.append(k_hat)
        terminal.append(terminal_cost_matrix(p_hat))

    return RiccatiSolution(
        P=tuple(P),
        K=tuple(K),
        A_cl=A_cl,
        P_hat=tuple(P_hat),
        K_hat=tuple(K_hat),
        terminal_cost=tuple(terminal),
        residual=coupled_residual(game, P, K),
    )
