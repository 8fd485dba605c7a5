"""Smoothed Fischer-Burmeister reformulation of the AVI KKT system and its Newton iteration.

The KKT conditions of ``{Du + d <= 0}`` are written with the slack ``s = -(Du + d)``, so that
complementarity reads ``s >= 0, lam >= 0, s * lam = 0`` and is encoded by ``phi_mu(s, lam) = 0``:

    Phi_mu(u, lam) = [Mu + q + D^T lam;  phi_mu(s, lam)]

With ``g = s / r - 1``, ``h = lam / r - 1`` and ``r = sqrt(s**2 + lam**2 + mu**2)``
the Jacobian is

    [[M,      D^T    ],
     [-G D,   H      ]]

This module depends on nothing but the problem data, so that the metric projection in
``vi_core`` can run the same iteration on ``AVI(I, -z)``.
"""

import logging
from collections.abc import Callable
from dataclasses import dataclass, field

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import (
    ARMIJO_SLACK,
    DEFAULT_ARMIJO_C,
    DEFAULT_BACKTRACK_BETA,
    MIN_STEP_SIZE,
)
from avi_games.data_structures.enums import LoggingLevel, ReducedVariant, SolverStatus
from avi_games.data_structures.models import AviProblem, Matrix, Vector
from avi_games.solvers.exceptions import LinesearchFailure
from avi_games.solvers.linear_algebra import (
    LuFactor,
    lu_factor_checked,
    lu_factor_with_ridge,
    lu_solve,
)
from avi_games.solvers.models import NewtonConfig
from avi_games.vi_core.exceptions import NumericalFailure

logger = logging.getLogger(__name__)

Direction = tuple[Vector, Vector]
StopMetric = Callable[[Vector, Vector, Vector], float]
"""Called with ``(u, lam, Phi_mu(u, lam))``, returns the number compared against the tolerance."""


@dataclass(frozen=True, eq=False)
class SmoothedKktState:
    u: Vector
    lam: Vector
    mu: float

    def __post_init__(self) -> None:
        if not self.mu > 0:
            raise ValueError(f"Smoothing parameter must be strictly positive, got {self.mu=}")


def phi_mu(a: float | Vector, b: float | Vector, mu: float) -> float | Vector:
    """``sqrt(a**2 + b**2 + mu**2) - a - b`` componentwise. ``mu = 0`` is the exact FB function."""
    return np.hypot(np.hypot(a, b), mu) - a - b


def slack(problem: AviProblem, u: Vector) -> Vector:
    return -problem.feasible_set.values(u)


def kkt_map(problem: AviProblem, u: Vector, lam: Vector, mu: float) -> Vector:
    """``Phi_mu(u, lam)``. Unlike `ncp_residual`, accepts ``mu = 0``."""
    stationarity = problem.M @ u + problem.q + problem.D.T @ lam
    return np.concatenate([stationarity, phi_mu(slack(problem, u), lam, mu)])


def ncp_residual(problem: AviProblem, state: SmoothedKktState) -> Vector:
    return kkt_map(problem, state.u, state.lam, state.mu)


def fb_derivatives(problem: AviProblem, state: SmoothedKktState) -> tuple[Vector, Vector]:
    """Diagonals ``g`` and ``h`` of the partial derivatives of ``phi_mu``. Both lie in (-2, 0)."""
    s = slack(problem, state.u)
    radius = np.hypot(np.hypot(s, state.lam), state.mu)
    return s / radius - 1.0, state.lam / radius - 1.0


def ncp_jacobian(problem: AviProblem, state: SmoothedKktState) -> Matrix:
    g, h = fb_derivatives(problem, state)
    return np.block(
        [
            [problem.M, problem.D.T],
            [-g[:, np.newaxis] * problem.D, np.diag(h)],
        ]
    )


def merit(phi: Vector) -> float:
    return 0.5 * float(phi @ phi)


def merit_gradient(problem: AviProblem, state: SmoothedKktState, phi: Vector) -> Vector:
    """``J^T Phi`` assembled block by block, without forming the Jacobian."""
    g, h = fb_derivatives(problem, state)
    top, bottom = phi[: problem.n], phi[problem.n :]
    return np.concatenate(
        [
            problem.M.T @ top - problem.D.T @ (g * bottom),
            problem.D @ top + h * bottom,
        ]
    )


def _split(problem: AviProblem, phi: Vector) -> tuple[Vector, Vector]:
    return phi[: problem.n], phi[problem.n :]


def newton_direction_full(problem: AviProblem, state: SmoothedKktState) -> Direction:
    """Solves ``J [du; dlam] = -Phi`` with a dense LU of the full (n+m) system."""
    phi = ncp_residual(problem, state)
    factor = lu_factor_with_ridge(ncp_jacobian(problem, state), primal_size=problem.n)
    step = lu_solve(factor, -phi)
    return step[: problem.n], step[problem.n :]


def newton_direction_reduced(problem: AviProblem, state: SmoothedKktState) -> Direction:
    """Eliminates the multiplier step and solves the n x n system

    ``(M + D^T diag(g / h) D) du = -r1 + D^T (r2 / h)``

    then recovers ``dlam = -(r2 - g * (D du)) / h``. ``h`` is strictly negative for ``mu > 0``.
    """
    r1, r2 = _split(problem, ncp_residual(problem, state))
    g, h = fb_derivatives(problem, state)
    D = problem.D

    reduced = problem.M + D.T @ ((g / h)[:, np.newaxis] * D)
    factor = lu_factor_with_ridge(reduced, primal_size=problem.n)
    du = lu_solve(factor, -r1 + D.T @ (r2 / h))
    dlam = -(r2 - g * (D @ du)) / h
    return du, dlam


def newton_direction_dual(
    problem: AviProblem, state: SmoothedKktState, m_factor: LuFactor | None = None
) -> Direction:
    """Eliminates the primal step instead, leaving an m x m system

    ``(H + G D M^-1 D^T) dlam = -r2 - g * (D M^-1 r1)``, ``du = M^-1 (-r1 - D^T dlam)``.

    Pays off when ``m < n`` and the factor of ``M`` is reused across iterations.
    """
    r1, r2 = _split(problem, ncp_residual(problem, state))
    g, h = fb_derivatives(problem, state)
    D = problem.D
    if m_factor is None:
        m_factor = lu_factor_checked(problem.M)

    m_inv_r1 = lu_solve(m_factor, r1)
    if problem.m == 0:
        return -m_inv_r1, np.zeros(0)

    m_inv_dt = lu_solve(m_factor, D.T)
    schur = np.diag(h) + g[:, np.newaxis] * (D @ m_inv_dt)
    factor = lu_factor_with_ridge(schur, primal_size=problem.m)
    dlam = lu_solve(factor, -r2 - g * (D @ m_inv_r1))
    du = -m_inv_r1 - m_inv_dt @ dlam
    return du, dlam


def backtrack(
    merit_at: Callable[[float], float],
    merit_0: float,
    slope: float,
    armijo_c: float = DEFAULT_ARMIJO_C,
    beta: float = DEFAULT_BACKTRACK_BETA,
) -> float:
    """Largest ``alpha`` in ``{1, beta, beta**2, ...}`` with
    ``merit_at(alpha) <= merit_0 + armijo_c * alpha * slope``.
    """
    alpha = 1.0
    while alpha >= MIN_STEP_SIZE:
        if merit_at(alpha) <= merit_0 + armijo_c * alpha * slope + ARMIJO_SLACK:
            return alpha
        alpha *= beta
    raise LinesearchFailure(
        f"No Armijo step above {MIN_STEP_SIZE:.0e} (merit {merit_0:.3e}, slope {slope:.3e})"
    )


def armijo_linesearch(
    problem: AviProblem,
    state: SmoothedKktState,
    direction: Direction,
    armijo_c: float = DEFAULT_ARMIJO_C,
    beta: float = DEFAULT_BACKTRACK_BETA,
) -> float:
    """Backtracking on ``Psi = 0.5 * ||Phi_mu||**2`` along ``direction``."""
    du, dlam = direction
    phi = ncp_residual(problem, state)
    slope = float(merit_gradient(problem, state, phi) @ np.concatenate([du, dlam]))

    def merit_at(alpha: float) -> float:
        return merit(kkt_map(problem, state.u + alpha * du, state.lam + alpha * dlam, state.mu))

    return backtrack(merit_at, merit(phi), slope, armijo_c, beta)


def _direction_rule(
    problem: AviProblem, config: NewtonConfig, m_factor: LuFactor | None
) -> Callable[[SmoothedKktState], Direction]:
    if not config.use_reduced_system:
        return lambda state: newton_direction_full(problem, state)

    variant = config.reduced_variant
    if variant == ReducedVariant.AUTO:
        variant = ReducedVariant.DUAL if problem.n > problem.m else ReducedVariant.PRIMAL
    if variant == ReducedVariant.PRIMAL:
        return lambda state: newton_direction_reduced(problem, state)

    factor = m_factor if m_factor is not None else lu_factor_checked(problem.M)
    return lambda state: newton_direction_dual(problem, state, factor)


@dataclass
class NewtonRun:
    """Raw outcome of `run_newton`, turned into a report by the callers."""

    u: Vector
    lam: Vector
    status: SolverStatus = SolverStatus.MAX_ITERATIONS
    stop_trace: list[float] = field(default_factory=list)
    merit_trace: list[float] = field(default_factory=list)
    kkt_trace: list[float] = field(default_factory=list)
    step_sizes: list[float] = field(default_factory=list)
    failure: NumericalFailure | None = None

    @property
    def kkt_norm(self) -> float:
        return self.kkt_trace[-1] if self.kkt_trace else float("inf")


def run_newton(
    problem: AviProblem,
    config: NewtonConfig,
    u0: Vector,
    lam0: Vector,
    stop_metric: StopMetric | None = None,
    m_factor: LuFactor | None = None,
    context: str = "newton",
) -> NewtonRun:
    """Damped Newton iteration on ``Phi_mu`` with fixed ``mu``.

    Every examined iterate gets one entry in each trace. The loop stops when the stop metric
    (``||Phi_mu||`` if none is given) drops to ``config.tol``, when the iteration cap allows no
    further update, or on a numerical breakdown. Breakdowns are recorded, not raised.
    """
    cap, cap_status = config.cap()
    direction_rule = _direction_rule(problem, config, m_factor)
    state = SmoothedKktState(u=u0.astype(float), lam=lam0.astype(float), mu=config.mu)
    run = NewtonRun(u=state.u, lam=state.lam)
    debug = logger.isEnabledFor(logging.DEBUG)

    for iteration in range(cap + 1):
        phi = ncp_residual(problem, state)
        kkt_norm = float(np.linalg.norm(phi))
        run.u, run.lam = state.u, state.lam
        try:
            metric = kkt_norm if stop_metric is None else stop_metric(state.u, state.lam, phi)
        except NumericalFailure as err:
            run.status = SolverStatus.NUMERICAL_FAILURE
            run.failure = err
            break

        run.stop_trace.append(metric)
        run.merit_trace.append(merit(phi))
        run.kkt_trace.append(kkt_norm)

        if debug:
            logs(
                f"{iteration=} residual={metric:.3e} kkt={kkt_norm:.3e}",
                level=LoggingLevel.DEBUG,
                context=context,
            )

        if metric <= config.tol:
            run.status = SolverStatus.CONVERGED
            break
        if iteration == cap:
            run.status = cap_status
            break

        try:
            direction = direction_rule(state)
            alpha = armijo_linesearch(
                problem, state, direction, config.armijo_c, config.backtrack_beta
            )
        except NumericalFailure as err:
            run.status = SolverStatus.NUMERICAL_FAILURE
            run.failure = err
            break

        du, dlam = direction
        run.step_sizes.append(alpha)
        state = SmoothedKktState(
            u=state.u + alpha * du, lam=state.lam + alpha * dlam, mu=state.mu
        )

    return run
