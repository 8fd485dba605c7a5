"""Brute-force KKT solver for small AVIs. Used as ground truth for the iterative solvers."""

import itertools
import logging

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import ORACLE_MAX_CONSTRAINTS, ORACLE_TOL
from avi_games.data_structures.enums import LoggingLevel
from avi_games.data_structures.models import AviProblem, Vector
from avi_games.vi_core.exceptions import NoFeasibleCandidate
from avi_games.vi_core.operations import strong_monotonicity_modulus

logger = logging.getLogger(__name__)


def solve_equality_kkt(
    problem: AviProblem, active: tuple[int, ...]
) -> tuple[Vector, Vector] | None:
    """Solves ``Mu + q + D_A^T lam_A = 0``, ``D_A u + d_A = 0``. ``None`` if singular."""
    n, size = problem.n, len(active)
    D_active = problem.D[list(active)]

    kkt_matrix = np.zeros((n + size, n + size))
    kkt_matrix[:n, :n] = problem.M
    kkt_matrix[:n, n:] = D_active.T
    kkt_matrix[n:, :n] = D_active
    rhs = np.concatenate([-problem.q, -problem.d[list(active)]])

    try:
        solution = np.linalg.solve(kkt_matrix, rhs)
    except np.linalg.LinAlgError:
        return None
    if not np.all(np.isfinite(solution)):
        return None

    lam = np.zeros(problem.m)
    lam[list(active)] = solution[n:]
    return solution[:n], lam


def active_set_oracle(problem: AviProblem, tol: float = ORACLE_TOL) -> tuple[Vector, Vector]:
    """Enumerates active sets from the smallest up and returns the first KKT point found.

    A candidate is accepted when its multipliers are ``>= -tol`` and ``Du + d <= tol``.
    """
    if problem.m > ORACLE_MAX_CONSTRAINTS:
        raise ValueError(
            f"Active-set enumeration is limited to {ORACLE_MAX_CONSTRAINTS} constraints, "
            f"got {problem.m}"
        )
    if strong_monotonicity_modulus(problem.M) <= 0:
        logs(
            "Operator is not strongly monotone, the KKT point may not be unique",
            level=LoggingLevel.WARNING,
        )

    for size in range(problem.m + 1):
        for active in itertools.combinations(range(problem.m), size):
            candidate = solve_equality_kkt(problem, active)
            if candidate is None:
                continue
            u, lam = candidate
            if np.all(lam >= -tol) and problem.feasible_set.is_feasible(u, tol=tol):
                return u, lam

    raise NoFeasibleCandidate(
        f"None of the {2**problem.m} active sets gives a KKT point "
        "(empty set or non-monotone operator?)"
    )
