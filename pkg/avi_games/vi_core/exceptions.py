from avi_games.auxil.exceptions import ApplicationException


class ViCoreError(ApplicationException):
    pass


class NumericalFailure(ViCoreError):
    """A linear-algebra or line-search breakdown inside an iterative solve."""


class InfeasibleSet(ViCoreError):
    """The polyhedron is (heuristically) detected to be empty."""


class NoFeasibleCandidate(ViCoreError):
    """No active set yields a valid KKT point."""


class ProblemSchemaError(ViCoreError):
    pass
