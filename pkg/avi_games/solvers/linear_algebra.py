"""Dense LU factorizations that fail loudly instead of returning garbage."""

import logging
import warnings
from typing import Any

import numpy as np
import scipy.linalg

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import RIDGE_REGULARIZATION, SINGULAR_PIVOT_TOL
from avi_games.data_structures.enums import LoggingLevel
from avi_games.data_structures.models import Matrix, Vector
from avi_games.solvers.exceptions import SingularJacobian

logger = logging.getLogger(__name__)

LuFactor = tuple[Matrix, Any]


def lu_factor_checked(matrix: Matrix) -> LuFactor:
    """LU with partial pivoting. Raises `SingularJacobian` on (numerically) singular input."""
    if matrix.size == 0:
        return matrix.copy(), np.zeros(0, dtype=np.int32)

    with warnings.catch_warnings():
        warnings.simplefilter("error", scipy.linalg.LinAlgWarning)
        try:
            lu, pivots = scipy.linalg.lu_factor(matrix)
        except (scipy.linalg.LinAlgWarning, ValueError, np.linalg.LinAlgError) as err:
            raise SingularJacobian(f"LU factorization failed: {err}") from err

    pivot_sizes = np.abs(np.diag(lu))
    if not np.all(np.isfinite(lu)):
        raise SingularJacobian("LU factors contain non-finite entries")
    if pivot_sizes.min() <= SINGULAR_PIVOT_TOL * max(pivot_sizes.max(), 1.0):
        raise SingularJacobian(
            f"Matrix is numerically singular: smallest pivot {pivot_sizes.min():.3e}"
        )
    return lu, pivots


def lu_factor_with_ridge(matrix: Matrix, primal_size: int) -> LuFactor:
    """Factorizes ``matrix``, retrying once with a ridge on its leading ``primal_size`` block."""
    try:
        return lu_factor_checked(matrix)
    except SingularJacobian as err:
        logs(f"{err}. Retrying with ridge {RIDGE_REGULARIZATION:.0e}", level=LoggingLevel.WARNING)

    regularized = matrix.copy()
    diagonal = np.arange(primal_size)
    regularized[diagonal, diagonal] += RIDGE_REGULARIZATION
    return lu_factor_checked(regularized)


def lu_solve(factor: LuFactor, rhs: Vector | Matrix) -> Vector | Matrix:
    if factor[0].size == 0:
        return np.zeros_like(rhs, dtype=float)
    return scipy.linalg.lu_solve(factor, rhs)
