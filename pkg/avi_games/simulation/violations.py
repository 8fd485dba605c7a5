"""Stage constraints evaluated on realized (not predicted) trajectories."""

import logging

import numpy as np

from avi_games.auxil.log_and_notify import logs
from avi_games.data_structures.constants import VIOLATION_TOL
from avi_games.data_structures.enums import ConstraintClass, LoggingLevel
from avi_games.data_structures.models import Vector
from avi_games.games.models import ConstraintSpec, LqGame
from avi_games.simulation.models import ClassViolation, RhLog, ViolationReport

logger = logging.getLogger(__name__)


def is_collision(spec: ConstraintSpec, state_values: Vector) -> bool:
    """A gap row at or above ``collision_gap`` means the physical gap is not positive."""
    if spec.collision_gap is None:
        return False
    gaps = [
        value
        for value, label in zip(state_values, spec.state_labels)
        if label == ConstraintClass.GAP
    ]
    return bool(gaps) and bool(max(gaps) >= spec.collision_gap)


def step_violation(
    game: LqGame, x: Vector, u: Vector, next_state: Vector
) -> tuple[float, bool]:
    """Largest violation of the input rows at ``(x, u)`` and of the state rows at
    ``next_state`` (zero if all hold), and whether ``next_state`` is a collision.
    """
    spec = game.constraints
    input_values = spec.input_values(x, u)
    state_values = spec.state_values(next_state)
    worst = max(np.max(input_values, initial=0.0), np.max(state_values, initial=0.0))
    return float(worst), is_collision(spec, state_values)


def check_violations(log: RhLog, game: LqGame) -> ViolationReport:
    """Input rows are checked at every ``(x[t], u[t])``, state rows at every logged state
    including the initial one. Steps of state rows are trajectory indices.
    """
    spec = game.constraints
    worst: dict[ConstraintClass, float] = {}
    first_step: dict[ConstraintClass, int] = {}
    steps: dict[ConstraintClass, set[int]] = {}
    first_collision = None

    def _note(values: Vector, labels: tuple[ConstraintClass, ...], step: int) -> None:
        for value, label in zip(values, labels):
            if value <= VIOLATION_TOL:
                continue
            worst[label] = max(worst.get(label, 0.0), float(value))
            first_step[label] = min(first_step.get(label, step), step)
            steps.setdefault(label, set()).add(step)

    for step, (x, u) in enumerate(zip(log.states, log.inputs)):
        _note(spec.input_values(x, u), spec.input_labels, step)

    for step, x in enumerate(log.states):
        state_values = spec.state_values(x)
        _note(state_values, spec.state_labels, step)
        if first_collision is None and is_collision(spec, state_values):
            first_collision = step

    report = ViolationReport(
        violations={
            label: ClassViolation(
                max_violation=worst[label], first_step=first_step[label], count=len(steps[label])
            )
            for label in sorted(worst, key=lambda item: first_step[item])
        },
        first_collision_step=first_collision,
    )
    if not report.is_empty:
        summary = ", ".join(
            f"{label.value} (max {item.max_violation:.3e} first at step {item.first_step})"
            for label, item in report.violations.items()
        )
        logs(
            f"Realized trajectory violates constraints: {summary or 'none'}; "
            f"collision at step {first_collision}",
            level=LoggingLevel.WARNING,
            context=log.solver,
        )
    return report
