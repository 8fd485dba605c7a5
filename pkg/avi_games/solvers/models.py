"""Solver configurations and per-operator cached quantities."""

import dataclasses
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Self

import numpy as np

from avi_games.auxil.config_files import read_config_block
from avi_games.data_structures.constants import (
    DEFAULT_ARMIJO_C,
    DEFAULT_BACKTRACK_BETA,
    DEFAULT_DR_GAMMA,
    DEFAULT_MAX_ITER,
    DEFAULT_SMOOTHING,
    DEFAULT_TOL,
)
from avi_games.data_structures.enums import ReducedVariant, SolverStatus, TerminationRule
from avi_games.data_structures.models import Matrix
from avi_games.solvers.exceptions import InvalidSolverConfig
from avi_games.solvers.linear_algebra import LuFactor, lu_factor_checked


class _ConfigMixin:
    """``from_dict``/``from_file`` for frozen config dataclasses. Unknown keys are rejected."""

    config_table: str = ""

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        known = {item.name for item in dataclasses.fields(cls)}  # type: ignore[arg-type]
        unknown = set(data) - known
        if unknown:
            raise InvalidSolverConfig(
                f"Unknown {cls.__name__} keys: {', '.join(sorted(unknown))}"
            )
        try:
            return cls(**data)
        except (TypeError, ValueError) as err:
            raise InvalidSolverConfig(f"Invalid {cls.__name__}: {err}") from err

    @classmethod
    def from_file(cls, path: Path) -> Self:
        return cls.from_dict(read_config_block(path, cls.config_table))

    def cap(self) -> tuple[int, SolverStatus]:
        """Number of update steps allowed and the status reported when they run out."""
        max_iter: int = getattr(self, "max_iter")
        budget: int | None = getattr(self, "iteration_budget")
        if budget is not None and budget <= max_iter:
            return budget, SolverStatus.BUDGET_EXHAUSTED
        return max_iter, SolverStatus.MAX_ITERATIONS


def _check_common(tol: float, max_iter: int, iteration_budget: int | None) -> None:
    if tol <= 0:
        raise InvalidSolverConfig(f"Tolerance must be positive, got {tol=}")
    if max_iter < 1:
        raise InvalidSolverConfig(f"{max_iter=} must be at least 1")
    if iteration_budget is not None and iteration_budget < 1:
        raise InvalidSolverConfig(f"{iteration_budget=} must be at least 1")


@dataclass(frozen=True)
class NewtonConfig(_ConfigMixin):
    config_table = "newton"

    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    mu: float = DEFAULT_SMOOTHING
    armijo_c: float = DEFAULT_ARMIJO_C
    backtrack_beta: float = DEFAULT_BACKTRACK_BETA
    iteration_budget: int | None = None
    use_reduced_system: bool = False
    reduced_variant: ReducedVariant = ReducedVariant.PRIMAL
    termination: TerminationRule = TerminationRule.NATURAL_RESIDUAL
    random_init: bool = False
    seed: int | None = None
    polish: bool = True
    """Replace a converged iterate by the exact solution on its active set."""

    def __post_init__(self) -> None:
        _check_common(self.tol, self.max_iter, self.iteration_budget)
        if self.mu <= 0:
            raise InvalidSolverConfig(f"Smoothing parameter must be positive, got {self.mu=}")
        if not 0 < self.armijo_c < 1:
            raise InvalidSolverConfig(f"{self.armijo_c=} must lie in (0, 1)")
        if not 0 < self.backtrack_beta < 1:
            raise InvalidSolverConfig(f"{self.backtrack_beta=} must lie in (0, 1)")
        # values coming from JSON/TOML are plain strings
        object.__setattr__(self, "reduced_variant", ReducedVariant(self.reduced_variant))
        object.__setattr__(self, "termination", TerminationRule(self.termination))


@dataclass(frozen=True)
class FirstOrderConfig(_ConfigMixin):
    config_table = "first_order"

    tol: float = DEFAULT_TOL
    max_iter: int = DEFAULT_MAX_ITER
    iteration_budget: int | None = None
    fb_step: float | None = None
    """Forward-backward step size. Derived from the operator when unset (see ``OperatorCache``)."""
    dr_gamma: float = DEFAULT_DR_GAMMA
    random_init: bool = False
    seed: int | None = None

    def __post_init__(self) -> None:
        _check_common(self.tol, self.max_iter, self.iteration_budget)
        if self.fb_step is not None and self.fb_step <= 0:
            raise InvalidSolverConfig(f"{self.fb_step=} must be positive")
        if self.dr_gamma <= 0:
            raise InvalidSolverConfig(f"{self.dr_gamma=} must be positive")


@dataclass(eq=False)
class OperatorCache:
    """Quantities that depend only on ``M`` and can be reused while ``q`` and ``d`` change.

    A receding-horizon simulation keeps one instance for the whole run.
    """

    M: Matrix
    _resolvent_factors: dict[float, LuFactor] = field(default_factory=dict, repr=False)

    @cached_property
    def modulus(self) -> float:
        """Strong monotonicity modulus ``lambda_min((M + M^T) / 2)``."""
        return float(np.linalg.eigvalsh((self.M + self.M.T) / 2).min())

    @cached_property
    def spectral_norm(self) -> float:
        return float(np.linalg.norm(self.M, 2))

    @cached_property
    def m_factor(self) -> LuFactor:
        """LU factors of ``M`` (dual Schur complement of the Newton system)."""
        return lu_factor_checked(self.M)

    def default_fb_step(self) -> float:
        """Half of the stability bound ``2 mu_m / L**2`` of the forward-backward iteration."""
        if self.spectral_norm == 0:
            return 1.0
        if self.modulus <= 0:
            return 1.0 / self.spectral_norm
        return self.modulus / self.spectral_norm**2

    def resolvent_factor(self, gamma: float) -> LuFactor:
        """LU factors of ``I + gamma * M``, computed once per ``gamma``."""
        if gamma not in self._resolvent_factors:
            shifted = np.eye(self.M.shape[0]) + gamma * self.M
            self._resolvent_factors[gamma] = lu_factor_checked(shifted)
        return self._resolvent_factors[gamma]
