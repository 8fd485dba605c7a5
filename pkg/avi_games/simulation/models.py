"""Configuration, per-step log and violation report of a receding-horizon run."""

import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, ClassVar, Self

import numpy as np

from avi_games.auxil.config_files import read_config_block
from avi_games.data_structures.constants import DEFAULT_HORIZON, DEFAULT_SIM_STEPS
from avi_games.data_structures.enums import (
    ConstraintClass,
    SolverName,
    SolverStatus,
    WarmStartPadding,
)
from avi_games.data_structures.models import Matrix, SolverReport, Vector
from avi_games.simulation.exceptions import InvalidSimulationConfig
from avi_games.solvers.registry import SolverConfig, get_solver


@dataclass(frozen=True)
class RhConfig:
    """Settings of one closed-loop run.

    ``iteration_budget`` overrides the budget of ``solver_config``; a budget makes the run a
    budget study, in which solves that stop on the budget are not failures.
    """

    config_table: ClassVar[str] = "simulation"

    horizon_T: int = DEFAULT_HORIZON
    sim_steps: int = DEFAULT_SIM_STEPS
    solver: SolverName = SolverName.NEWTON
    solver_config: SolverConfig | None = None
    warm_start: bool = True
    iteration_budget: int | None = None
    padding: WarmStartPadding = WarmStartPadding.ZERO
    """How the stage freed by the warm-start shift is filled."""

    def __post_init__(self) -> None:
        if self.horizon_T < 1:
            raise InvalidSimulationConfig(f"{self.horizon_T=} must be at least 1")
        if self.sim_steps < 1:
            raise InvalidSimulationConfig(f"{self.sim_steps=} must be at least 1")
        if self.iteration_budget is not None and self.iteration_budget < 1:
            raise InvalidSimulationConfig(f"{self.iteration_budget=} must be at least 1")
        try:
            object.__setattr__(self, "solver", SolverName(self.solver))
            object.__setattr__(self, "padding", WarmStartPadding(self.padding))
        except ValueError as err:
            raise InvalidSimulationConfig(str(err)) from err
        # raises InvalidSolverConfig for a config of the wrong family
        object.__setattr__(
            self, "solver_config", get_solver(self.solver).prepare_config(self.solver_config)
        )

    @property
    def budget_mode(self) -> bool:
        return self.effective_solver_config().iteration_budget is not None

    def effective_solver_config(self) -> SolverConfig:
        config = get_solver(self.solver).prepare_config(self.solver_config)
        if self.iteration_budget is None:
            return config
        return dataclasses.replace(config, iteration_budget=self.iteration_budget)

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Self:
        """Builds the config from JSON/TOML data. ``solver_config`` may be a plain mapping,
        read with the config class of the chosen solver.
        """
        known = {item.name for item in dataclasses.fields(cls)}
        unknown = set(data) - known
        if unknown:
            raise InvalidSimulationConfig(f"Unknown RhConfig keys: {', '.join(sorted(unknown))}")

        data = dict(data)
        solver_config = data.get("solver_config")
        if isinstance(solver_config, dict):
            solver = data.get("solver", SolverName.NEWTON)
            data["solver_config"] = get_solver(solver).config_type.from_dict(solver_config)
        try:
            return cls(**data)
        except TypeError as err:
            raise InvalidSimulationConfig(f"Invalid RhConfig: {err}") from err

    @classmethod
    def from_file(cls, path: Path) -> Self:
        return cls.from_dict(read_config_block(path, cls.config_table))


@dataclass(eq=False)
class RhLog:
    """Everything recorded during a receding-horizon run.

    Per-step lists have one entry per simulated step. ``states`` starts with the initial state,
    so it is one entry longer. ``inputs`` are the first-stage decisions of the solves,
    ``applied_inputs`` the accelerations that actually acted on the plant.
    Physical ``positions`` and ``velocities`` (``steps + 1`` rows) are attached for scenarios.
    """

    solver: str
    states: list[Vector]
    iterations: list[int] = field(default_factory=list)
    elapsed: list[float] = field(default_factory=list)
    residual: list[float] = field(default_factory=list)
    status: list[SolverStatus] = field(default_factory=list)
    violation_max: list[float] = field(default_factory=list)
    collision: list[bool] = field(default_factory=list)
    inputs: list[Vector] = field(default_factory=list)
    applied_inputs: list[Vector] = field(default_factory=list)
    positions: Matrix | None = None
    velocities: Matrix | None = None

    @property
    def steps(self) -> int:
        return len(self.iterations)

    @property
    def state_trajectory(self) -> Matrix:
        return np.array(self.states)

    @property
    def input_trajectory(self) -> Matrix:
        return np.array(self.inputs) if self.inputs else np.zeros((0, 0))

    @property
    def applied_trajectory(self) -> Matrix:
        return np.array(self.applied_inputs) if self.applied_inputs else np.zeros((0, 0))

    @property
    def collided(self) -> bool:
        return any(self.collision)

    @property
    def all_converged(self) -> bool:
        return all(status == SolverStatus.CONVERGED for status in self.status)

    def record(
        self,
        report: SolverReport,
        u: Vector,
        applied: Vector,
        next_state: Vector,
        violation_max: float,
        collision: bool,
    ) -> None:
        self.iterations.append(report.iterations)
        self.elapsed.append(report.elapsed)
        self.residual.append(report.residual)
        self.status.append(report.status)
        self.inputs.append(u)
        self.applied_inputs.append(applied)
        self.states.append(next_state)
        self.violation_max.append(violation_max)
        self.collision.append(collision)


@dataclass(frozen=True)
class ClassViolation:
    max_violation: float
    first_step: int
    count: int
    """Number of steps at which at least one row of the class is violated."""


@dataclass(frozen=True)
class ViolationReport:
    """Constraint violations of a realized trajectory, grouped by constraint class."""

    violations: dict[ConstraintClass, ClassViolation] = field(default_factory=dict)
    first_collision_step: int | None = None

    @property
    def collision(self) -> bool:
        return self.first_collision_step is not None

    @property
    def is_empty(self) -> bool:
        return not self.violations and not self.collision

    def to_dict(self) -> dict[str, Any]:
        return {
            "collision": self.collision,
            "first_collision_step": self.first_collision_step,
            "violations": {
                constraint_class.value: dataclasses.asdict(violation)
                for constraint_class, violation in self.violations.items()
            },
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "ViolationReport":
        return cls(
            violations={
                ConstraintClass(key): ClassViolation(**value)
                for key, value in data["violations"].items()
            },
            first_collision_step=data["first_collision_step"],
        )


@dataclass(frozen=True)
class StepMetrics:
    """One row of the metrics file."""

    t: int
    iterations: int
    elapsed_s: float
    residual: float
    status: SolverStatus
    violation_max: float
    collision: bool


@dataclass(frozen=True)
class Percentiles:
    p10: float
    p50: float
    p90: float

    @classmethod
    def of(cls, values: list[float] | list[int]) -> "Percentiles":
        if not values:
            return cls(np.nan, np.nan, np.nan)
        p10, p50, p90 = np.percentile(np.asarray(values, dtype=float), [10, 50, 90])
        return cls(float(p10), float(p50), float(p90))


@dataclass(frozen=True)
class RunSummary:
    """Iteration and timing statistics of one run. ``p50`` is the median."""

    solver: str
    steps: int
    iterations: Percentiles
    elapsed_s: Percentiles
    total_elapsed_s: float
    status_counts: dict[str, int]
    violations: ViolationReport = field(default_factory=ViolationReport)

    @property
    def median_iterations(self) -> float:
        return self.iterations.p50

    def to_dict(self) -> dict[str, Any]:
        return {
            "solver": self.solver,
            "steps": self.steps,
            "iterations": dataclasses.asdict(self.iterations),
            "elapsed_s": dataclasses.asdict(self.elapsed_s),
            "total_elapsed_s": self.total_elapsed_s,
            "status_counts": self.status_counts,
            "violations": self.violations.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "RunSummary":
        return cls(
            solver=data["solver"],
            steps=int(data["steps"]),
            iterations=Percentiles(**data["iterations"]),
            elapsed_s=Percentiles(**data["elapsed_s"]),
            total_elapsed_s=float(data["total_elapsed_s"]),
            status_counts={key: int(value) for key, value in data["status_counts"].items()},
            violations=ViolationReport.from_dict(data["violations"]),
        )


@dataclass(frozen=True, eq=False)
class TrajectoryTable:
    """Contents of a trajectory file.

    Scenario runs store physical ``positions`` and ``velocities``, other runs the game
    ``states``; the unused fields are ``None``. All of them have ``steps + 1`` rows, while
    ``applied_inputs`` has ``steps``.
    """

    times: Vector
    applied_inputs: Matrix
    positions: Matrix | None = None
    velocities: Matrix | None = None
    states: Matrix | None = None
