from avi_games.auxil.exceptions import ApplicationException


class CliError(ApplicationException):
    pass


class UsageError(CliError):
    pass


class OutputFileError(CliError):
    pass
