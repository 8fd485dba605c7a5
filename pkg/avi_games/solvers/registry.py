"""Solvers selectable by name (``newton``, ``fast-newton``, ``fb``, ``dr``)."""

import dataclasses
import logging
from collections.abc import Callable
from dataclasses import dataclass

from avi_games.data_structures.enums import SolverName
from avi_games.data_structures.models import AviProblem, SolverReport
from avi_games.solvers import first_order, newton
from avi_games.solvers.exceptions import InvalidSolverConfig, UnknownSolver
from avi_games.solvers.models import FirstOrderConfig, NewtonConfig, OperatorCache
from avi_games.vi_core.operations import Projection

logger = logging.getLogger(__name__)

SolverConfig = NewtonConfig | FirstOrderConfig
SolveFunction = Callable[..., SolverReport]


@dataclass(frozen=True)
class RegisteredSolver:
    name: SolverName
    solve: SolveFunction
    config_type: type[NewtonConfig] | type[FirstOrderConfig]

    def prepare_config(self, config: SolverConfig | None) -> SolverConfig:
        """Checks the config type. ``fast-newton`` always gets the reduced system switched on."""
        config = config if config is not None else self.config_type()
        if not isinstance(config, self.config_type):
            raise InvalidSolverConfig(
                f"Solver {self.name.value!r} expects {self.config_type.__name__}, "
                f"got {type(config).__name__}"
            )
        if self.name == SolverName.FAST_NEWTON and isinstance(config, NewtonConfig):
            return dataclasses.replace(config, use_reduced_system=True)
        if self.name == SolverName.NEWTON and isinstance(config, NewtonConfig):
            return dataclasses.replace(config, use_reduced_system=False)
        return config


SOLVERS: dict[SolverName, RegisteredSolver] = {
    SolverName.NEWTON: RegisteredSolver(SolverName.NEWTON, newton.solve, NewtonConfig),
    SolverName.FAST_NEWTON: RegisteredSolver(SolverName.FAST_NEWTON, newton.solve, NewtonConfig),
    SolverName.FB: RegisteredSolver(SolverName.FB, first_order.fb_solve, FirstOrderConfig),
    SolverName.DR: RegisteredSolver(SolverName.DR, first_order.dr_solve, FirstOrderConfig),
}


def get_solver(name: str | SolverName) -> RegisteredSolver:
    try:
        return SOLVERS[SolverName(name)]
    except ValueError as err:
        known = ", ".join(solver.value for solver in SolverName)
        raise UnknownSolver(f"Unknown solver {name!r}. Known solvers: {known}") from err


def default_config(name: str | SolverName) -> SolverConfig:
    return get_solver(name).prepare_config(None)


def run_solver(
    name: str | SolverName,
    problem: AviProblem,
    config: SolverConfig | None = None,
    warm: Projection | None = None,
    cache: OperatorCache | None = None,
) -> SolverReport:
    solver = get_solver(name)
    return solver.solve(problem, solver.prepare_config(config), warm=warm, cache=cache)
