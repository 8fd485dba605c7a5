"""Smoothed Fischer-Burmeister Newton solver for AVIs (full and reduced linear algebra)."""

import logging
import time

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import FEASIBILITY_TOL
from avi_games.data_structures.enums import (
    LoggingLevel,
    ReducedVariant,
    SolverName,
    SolverStatus,
    TerminationRule,
)
from avi_games.data_structures.models import AviProblem, SolverReport, Vector
from avi_games.solvers.models import NewtonConfig, OperatorCache
from avi_games.solvers.smoothed_kkt import StopMetric, run_newton, slack
from avi_games.vi_core.exceptions import NumericalFailure
from avi_games.vi_core.operations import (
    Projection,
    natural_residual,
    natural_residual_with_projection,
    project_polyhedron,
)
from avi_games.vi_core.oracle import solve_equality_kkt

logger = logging.getLogger(__name__)


def initial_point(
    problem: AviProblem, random_init: bool = False, seed: int | None = None
) -> tuple[Vector, Vector]:
    """``u = 0, lam = 1`` or, with ``random_init``, ``u ~ N(0, 1)`` and ``lam ~ U(0.5, 1.5)``."""
    if not random_init:
        return np.zeros(problem.n), np.ones(problem.m)
    rng = np.random.default_rng(seed)
    return rng.standard_normal(problem.n), rng.uniform(0.5, 1.5, problem.m)


def check_warm_start(problem: AviProblem, warm: Projection) -> tuple[Vector, Vector]:
    u0, lam0 = (np.asarray(item, dtype=float) for item in warm)
    if u0.shape != (problem.n,) or lam0.shape != (problem.m,):
        raise ValueError(
            f"Warm start shapes {u0.shape}, {lam0.shape} do not match n={problem.n}, "
            f"m={problem.m}"
        )
    return u0, lam0


def _natural_residual_metric(problem: AviProblem) -> StopMetric:
    def metric(u: Vector, lam: Vector, phi: Vector) -> float:
        # at a solution, the projection of u - F(u) is u itself with the AVI multipliers
        return natural_residual_with_projection(problem, u, warm=(u, np.maximum(lam, 0)))[0]

    return metric


def polish(problem: AviProblem, u: Vector, lam: Vector) -> Projection | None:
    """Exact KKT point on the active set the iterate points at (rows with ``lam > slack``).

    ``None`` if that equality system is singular or its solution is infeasible or has a
    negative multiplier.
    """
    active = tuple(int(row) for row in np.flatnonzero(lam > slack(problem, u)))
    candidate = solve_equality_kkt(problem, active)
    if candidate is None:
        return None
    u_exact, lam_exact = candidate
    if np.min(lam_exact, initial=0.0) < -FEASIBILITY_TOL:
        return None
    if not problem.feasible_set.is_feasible(u_exact, tol=FEASIBILITY_TOL):
        return None
    return u_exact, np.maximum(lam_exact, 0.0)


def _polished(
    problem: AviProblem, u: Vector, lam: Vector, tol: float, context: str
) -> tuple[Vector, Vector, float] | None:
    """Polished iterate with its natural residual, or the projection of an infeasible ``u``."""
    exact = polish(problem, u, lam)
    if exact is None and problem.feasible_set.is_feasible(u, tol=FEASIBILITY_TOL):
        return None
    try:
        if exact is None:
            exact = project_polyhedron(problem.feasible_set, u), np.maximum(lam, 0.0)
        residual = natural_residual(problem, exact[0], warm=exact)
    except NumericalFailure:
        return None
    if residual > tol:
        logs(
            f"Polished point has residual {residual:.3e}, dropped",
            level=LoggingLevel.DEBUG,
            context=context,
        )
        return None
    if logger.isEnabledFor(logging.DEBUG):
        shift = float(np.linalg.norm(exact[0] - u))
        logs(f"Polished by {shift:.2e}", level=LoggingLevel.DEBUG, context=context)
    return exact[0], exact[1], residual


def _uses_dual_system(problem: AviProblem, config: NewtonConfig) -> bool:
    if not config.use_reduced_system:
        return False
    if config.reduced_variant == ReducedVariant.AUTO:
        return problem.n > problem.m
    return config.reduced_variant == ReducedVariant.DUAL


def solve(
    problem: AviProblem,
    config: NewtonConfig = NewtonConfig(),
    warm: Projection | None = None,
    cache: OperatorCache | None = None,
) -> SolverReport:
    """Runs the damped Newton iteration on the smoothed KKT system of ``problem``.

    Linear-algebra and line-search breakdowns end the solve with status ``NUMERICAL_FAILURE``
    and the last iterate. ``InfeasibleSet`` from the residual projection is raised.

    With ``config.polish`` a converged natural-residual solve returns the exact KKT point of the
    active set it identified (see ``polish``), so the solution is feasible and its multipliers
    are consistent with it.
    """
    name = SolverName.FAST_NEWTON if config.use_reduced_system else SolverName.NEWTON
    start = time.perf_counter()

    if warm is not None:
        u0, lam0 = check_warm_start(problem, warm)
    else:
        u0, lam0 = initial_point(problem, config.random_init, config.seed)

    m_factor = None
    if _uses_dual_system(problem, config):
        try:
            m_factor = (cache or OperatorCache(problem.M)).m_factor
        except NumericalFailure as err:
            logs(f"Cannot factorize M for the dual system: {err}", level=LoggingLevel.WARNING)
            return SolverReport(
                solution=u0,
                multipliers=lam0,
                status=SolverStatus.NUMERICAL_FAILURE,
                residual=float("nan"),
                elapsed=time.perf_counter() - start,
                solver=name.value,
            )

    natural = config.termination == TerminationRule.NATURAL_RESIDUAL
    run = run_newton(
        problem,
        config,
        u0,
        lam0,
        stop_metric=_natural_residual_metric(problem) if natural else None,
        m_factor=m_factor,
        context=name.value,
    )

    if natural and run.stop_trace and run.failure is None:
        residual = run.stop_trace[-1]
    else:
        try:
            residual = natural_residual(problem, run.u)
        except NumericalFailure:
            residual = float("nan")

    u, lam = run.u, run.lam
    if natural and config.polish and run.status == SolverStatus.CONVERGED:
        polished = _polished(problem, u, lam, config.tol, name.value)
        if polished is not None:
            u, lam, residual = polished

    elapsed = time.perf_counter() - start
    level = (
        LoggingLevel.WARNING
        if run.status == SolverStatus.NUMERICAL_FAILURE
        else LoggingLevel.INFO
    )
    logs(
        f"{run.status.value} after {len(run.stop_trace)} iterations, "
        f"residual {residual:.3e}, {elapsed:.4f} s",
        level=level,
        context=name.value,
    )
    if run.failure is not None:
        logs(
            f"Numerical breakdown: {run.failure}",
            level=LoggingLevel.WARNING,
            context=name.value,
        )

    return SolverReport(
        solution=u,
        multipliers=lam,
        status=run.status,
        residual=residual,
        elapsed=elapsed,
        solver=name.value,
        residual_trace=run.stop_trace,
        merit_trace=run.merit_trace,
        kkt_trace=run.kkt_trace,
        step_sizes=run.step_sizes,
    )
