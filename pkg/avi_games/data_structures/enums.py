from enum import Enum, IntEnum


class ConstraintClass(str, Enum):
    """Physical meaning of a constraint row. Used to group violations in reports."""

    GAP = "gap"
    VELOCITY = "velocity"
    INPUT = "input"
    STATE = "state"


class ExitCode(IntEnum):
    """Exit codes of the command-line entry point."""

    OK = 0
    INPUT_ERROR = 1
    """Unreadable or malformed input, or wrong usage."""
    NOT_CONVERGED = 2
    NUMERICAL_FAILURE = 3
    VIOLATIONS = 4


class LoggingLevel(str, Enum):
    DEBUG = "debug"
    INFO = "info"
    WARNING = "warning"
    ERROR = "error"
    CRITICAL = "critical"
    EXCEPTION = "exception"


class OutputFormat(str, Enum):
    CSV = "csv"
    JSON = "json"


class ReducedVariant(str, Enum):
    """Which Schur complement of the Newton system is factorized when the reduced path is on.

    ``PRIMAL`` eliminates the multipliers (n×n system), ``DUAL`` eliminates the primal step
    using a one-off factorization of M (m×m system), ``AUTO`` picks the smaller one.
    """

    PRIMAL = "primal"
    DUAL = "dual"
    AUTO = "auto"


class ScenarioType(str, Enum):
    INTERSECTION = "intersection"
    PLATOONING = "platooning"


class SolverName(str, Enum):
    """Names under which solvers are registered. Members of this enum can be treated as strings."""

    NEWTON = "newton"
    FAST_NEWTON = "fast-newton"
    FB = "fb"
    DR = "dr"


class SolverStatus(str, Enum):
    CONVERGED = "converged"
    MAX_ITERATIONS = "max_iterations"
    BUDGET_EXHAUSTED = "budget_exhausted"
    NUMERICAL_FAILURE = "numerical_failure"


class TerminationRule(str, Enum):
    """Quantity compared against the tolerance by the Newton solver."""

    NATURAL_RESIDUAL = "natural_residual"
    SMOOTHED_KKT = "smoothed_kkt"


class WarmStartPadding(str, Enum):
    """How the stage freed by shifting the previous input sequence is filled."""

    FEEDBACK = "feedback"
    ZERO = "zero"
