"""Forward-backward and Douglas-Rachford iterations, the first-order baselines.

Both terminate on the natural residual of the primal iterate, like the Newton solver, and
return the last iterate when the iteration cap is hit (budgeted runs rely on this).
Projection failures are raised to the caller.
"""

import logging
import time

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.enums import SolverName, SolverStatus
from avi_games.data_structures.models import AviProblem, SolverReport, Vector
from avi_games.solvers.linear_algebra import lu_solve
from avi_games.solvers.models import FirstOrderConfig, OperatorCache
from avi_games.vi_core.operations import (
    Projection,
    natural_residual_with_projection,
    project_with_multipliers,
)

logger = logging.getLogger(__name__)


def _initial_u(problem: AviProblem, config: FirstOrderConfig, warm: Projection | None) -> Vector:
    if warm is not None:
        u0 = np.asarray(warm[0], dtype=float)
        if u0.shape != (problem.n,):
            raise ValueError(f"Warm start has shape {u0.shape}, expected ({problem.n},)")
        return u0.copy()
    if config.random_init:
        return np.random.default_rng(config.seed).standard_normal(problem.n)
    return np.zeros(problem.n)


def _finish(
    name: SolverName,
    start: float,
    u: Vector,
    multipliers: Vector,
    status: SolverStatus,
    trace: list[float],
) -> SolverReport:
    elapsed = time.perf_counter() - start
    logs(
        f"{status.value} after {len(trace)} iterations, residual {trace[-1]:.3e}, "
        f"{elapsed:.4f} s",
        context=name.value,
    )
    return SolverReport(
        solution=u,
        multipliers=multipliers,
        status=status,
        residual=trace[-1],
        elapsed=elapsed,
        solver=name.value,
        residual_trace=trace,
        merit_trace=[0.5 * residual**2 for residual in trace],
    )


def fb_solve(
    problem: AviProblem,
    config: FirstOrderConfig = FirstOrderConfig(),
    warm: Projection | None = None,
    cache: OperatorCache | None = None,
) -> SolverReport:
    """Projected gradient ``u <- proj(u - step * (Mu + q))``. Multipliers are reported as zeros."""
    start = time.perf_counter()
    cache = cache or OperatorCache(problem.M)
    step = config.fb_step if config.fb_step is not None else cache.default_fb_step()
    cap, cap_status = config.cap()

    u = _initial_u(problem, config, warm)
    trace: list[float] = []
    residual_warm: Projection | None = None
    step_warm: Projection | None = None
    status = cap_status

    for iteration in range(cap + 1):
        residual, residual_warm = natural_residual_with_projection(problem, u, residual_warm)
        trace.append(residual)
        if residual <= config.tol:
            status = SolverStatus.CONVERGED
            break
        if iteration == cap:
            break
        if step == 1.0:
            # the residual projection is the update itself
            u = residual_warm[0]
            continue
        step_warm = project_with_multipliers(
            problem.feasible_set, u - step * problem.operator(u), step_warm
        )
        u = step_warm[0]

    return _finish(SolverName.FB, start, u, np.zeros(problem.m), status, trace)


def resolvent(factor_cache: OperatorCache, gamma: float, q: Vector, z: Vector) -> Vector:
    """``x`` with ``(I + gamma * M) x = z - gamma * q``."""
    return lu_solve(factor_cache.resolvent_factor(gamma), z - gamma * q)


def dr_solve(
    problem: AviProblem,
    config: FirstOrderConfig = FirstOrderConfig(),
    warm: Projection | None = None,
    cache: OperatorCache | None = None,
) -> SolverReport:
    """Douglas-Rachford splitting between ``F`` and the normal cone of the set:

    ``z <- z + proj(2 J(z) - z) - J(z)`` with the affine resolvent ``J``.

    The governing sequence starts at ``z0 = (I + gamma * M) u0 + gamma * q`` so that
    ``J(z0) = u0``. Multipliers are recovered from the last projection as ``nu / gamma``.
    """
    start = time.perf_counter()
    cache = cache or OperatorCache(problem.M)
    gamma = config.dr_gamma
    cap, cap_status = config.cap()

    u0 = _initial_u(problem, config, warm)
    z = u0 + gamma * problem.operator(u0)
    trace: list[float] = []
    residual_warm: Projection | None = None
    reflection_warm: Projection | None = None
    status = cap_status

    for iteration in range(cap + 1):
        u = resolvent(cache, gamma, problem.q, z)
        residual, residual_warm = natural_residual_with_projection(problem, u, residual_warm)
        trace.append(residual)
        if residual <= config.tol:
            status = SolverStatus.CONVERGED
            break
        if iteration == cap:
            break
        reflection_warm = project_with_multipliers(
            problem.feasible_set, 2 * u - z, reflection_warm
        )
        z = z + reflection_warm[0] - u

    multipliers = (
        reflection_warm[1] / gamma if reflection_warm is not None else np.zeros(problem.m)
    )
    return _finish(SolverName.DR, start, u, multipliers, status, trace)
