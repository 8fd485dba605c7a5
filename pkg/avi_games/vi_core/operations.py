"""Metric projection onto a polyhedron, natural residual and related checks."""

import logging
from dataclasses import dataclass

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import (
    INFEASIBILITY_MULTIPLIER_NORM,
    PROJECTION_ACCEPT_TOL,
    PROJECTION_MAX_ITER,
    PROJECTION_SMOOTHING,
    PROJECTION_TOL,
    STAGNATION_WINDOW,
)
from avi_games.data_structures.enums import LoggingLevel, SolverStatus, TerminationRule
from avi_games.data_structures.models import (
    AffineOperator,
    AviProblem,
    Matrix,
    PolyhedralSet,
    Vector,
)
from avi_games.solvers.models import NewtonConfig
from avi_games.solvers.smoothed_kkt import NewtonRun, run_newton
from avi_games.vi_core.exceptions import InfeasibleSet, NumericalFailure

logger = logging.getLogger(__name__)

Projection = tuple[Vector, Vector]
"""Projected point and the multipliers of the projection subproblem."""

PROJECTION_CONFIG = NewtonConfig(
    tol=PROJECTION_TOL,
    max_iter=PROJECTION_MAX_ITER,
    mu=PROJECTION_SMOOTHING,
    termination=TerminationRule.SMOOTHED_KKT,
)


def strong_monotonicity_modulus(M: Matrix) -> float:
    """Smallest eigenvalue of the symmetric part of ``M``. Positive means strongly monotone."""
    M = np.asarray(M, dtype=float)
    if M.size == 0:
        return 0.0
    return float(np.linalg.eigvalsh((M + M.T) / 2).min())


def _stagnated(run: NewtonRun) -> bool:
    if run.failure is not None:
        return True
    window = run.kkt_trace[-STAGNATION_WINDOW:]
    return len(window) == STAGNATION_WINDOW and window[-1] > 0.9 * window[0]


def project_with_multipliers(
    feasible_set: PolyhedralSet, z: Vector, warm: Projection | None = None
) -> Projection:
    """``argmin ||y - z||`` over the set, solved as ``AVI(I, -z)`` on the same set.

    Points that already satisfy ``Dz + d <= 0`` are returned unchanged with zero multipliers.
    ``warm`` seeds the inner Newton iteration, which pays off when consecutive projected points
    are close (iterative solvers, natural residual checks along a Newton path).

    Raises:
        InfeasibleSet: the inner solve fails with diverging multipliers.
        NumericalFailure: the inner solve fails for any other reason.
    """
    z = np.asarray(z, dtype=float)
    if feasible_set.m == 0 or np.max(feasible_set.values(z)) <= 0:
        return z.copy(), np.zeros(feasible_set.m)

    subproblem = AviProblem(
        operator=AffineOperator(M=np.eye(feasible_set.n), q=-z), feasible_set=feasible_set
    )
    y0, lam0 = warm if warm is not None else (z, np.zeros(feasible_set.m))
    run = run_newton(subproblem, PROJECTION_CONFIG, y0, lam0, context="projection")

    if run.status == SolverStatus.CONVERGED or run.kkt_norm <= PROJECTION_ACCEPT_TOL:
        return run.u, run.lam

    multiplier_norm = float(np.linalg.norm(run.lam))
    if multiplier_norm > INFEASIBILITY_MULTIPLIER_NORM and _stagnated(run):
        raise InfeasibleSet(
            f"Projection multipliers diverge ({multiplier_norm:.2e}) while the KKT residual "
            f"stalls at {run.kkt_norm:.2e}: the polyhedron looks empty"
        )

    logs(
        f"Projection failed with status {run.status.value}, KKT residual {run.kkt_norm:.2e}",
        level=LoggingLevel.WARNING,
    )
    raise NumericalFailure(
        f"Projection did not converge: {run.status.value}, KKT residual {run.kkt_norm:.2e}"
    ) from run.failure


def project_polyhedron(
    feasible_set: PolyhedralSet, z: Vector, warm: Projection | None = None
) -> Vector:
    return project_with_multipliers(feasible_set, z, warm)[0]


def natural_residual_with_projection(
    problem: AviProblem, u: Vector, warm: Projection | None = None
) -> tuple[float, Projection]:
    projection = project_with_multipliers(
        problem.feasible_set, u - problem.operator(u), warm=warm
    )
    return float(np.linalg.norm(u - projection[0])), projection


def natural_residual(problem: AviProblem, u: Vector, warm: Projection | None = None) -> float:
    """``||u - proj(u - Mu - q)||``, zero exactly at solutions of the AVI."""
    return natural_residual_with_projection(problem, np.asarray(u, dtype=float), warm)[0]


@dataclass(frozen=True)
class KktViolation:
    """Worst violation of each KKT condition of the AVI, all nonnegative."""

    stationarity: float
    primal_feasibility: float
    dual_feasibility: float
    complementarity: float

    @property
    def worst(self) -> float:
        return max(
            self.stationarity,
            self.primal_feasibility,
            self.dual_feasibility,
            self.complementarity,
        )


def kkt_violation(problem: AviProblem, u: Vector, lam: Vector) -> KktViolation:
    values = problem.feasible_set.values(u)
    stationarity = problem.operator(u) + problem.D.T @ lam
    return KktViolation(
        stationarity=float(np.max(np.abs(stationarity), initial=0.0)),
        primal_feasibility=float(np.max(values, initial=0.0)),
        dual_feasibility=float(np.max(-lam, initial=0.0)),
        complementarity=float(np.max(np.abs(lam * values), initial=0.0)),
    )
