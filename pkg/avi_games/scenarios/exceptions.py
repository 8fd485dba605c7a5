from avi_games.auxil.exceptions import ApplicationException


class ScenarioError(ApplicationException):
    pass


class InvalidParams(ScenarioError):
    pass


class CyclicPrecedence(ScenarioError):
    """The predecessor map of the vehicles is not a forest."""
