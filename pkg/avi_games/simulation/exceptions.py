from typing import TYPE_CHECKING

from avi_games.auxil.exceptions import ApplicationException

if TYPE_CHECKING:
    from avi_games.simulation.models import RhLog


class SimulationError(ApplicationException):
    pass


class InvalidSimulationConfig(SimulationError):
    pass


class SolverFailure(SimulationError):
    """A solve broke down during a receding-horizon run.

    ``log`` holds every step completed before ``step``.
    """

    def __init__(self, message: str, log: "RhLog", step: int) -> None:
        super().__init__(message)
        self.log = log
        self.step = step


class LogFileError(SimulationError):
    pass
