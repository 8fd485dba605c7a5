from avi_games.auxil.exceptions import ApplicationException


class GameError(ApplicationException):
    pass


class InvalidGame(GameError):
    pass


class NoStabilizingSolution(GameError):
    """The Riccati iteration did not converge or converged to a non-stabilizing gain."""


class NonMonotoneOperator(UserWarning):
    """The compiled game operator is not strongly monotone, so solvers may fail to converge."""
