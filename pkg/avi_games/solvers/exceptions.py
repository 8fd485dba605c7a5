from avi_games.auxil.exceptions import ApplicationException
from avi_games.vi_core.exceptions import NumericalFailure


class SolverError(ApplicationException):
    pass


class SingularJacobian(NumericalFailure):
    pass


class LinesearchFailure(NumericalFailure):
    pass


class UnknownSolver(SolverError):
    pass


class InvalidSolverConfig(SolverError):
    pass
