import logging

from dotenv import load_dotenv

from avi_games.auxil.constants import CALLER_LOGGING_STACK_LEVEL, LOGGING_FORMAT
from avi_games.data_structures.enums import LoggingLevel

load_dotenv()

logger = logging.getLogger(__name__)


def logs(
    text: str,
    level: LoggingLevel = LoggingLevel.INFO,
    stacklevel: int = CALLER_LOGGING_STACK_LEVEL,
    context: str | None = None,
) -> None:
    """Sends message to logger.

    If ``context`` is provided (e.g. solver name or receding-horizon step), it is shown
    in front of the message.

    By default, shows calling function's name (due to default stack level).
    """
    extra_info = f"[{context}] " if context else ""

    getattr(logger, level)(f"{extra_info}{text}", stacklevel=stacklevel)


def configure_logging(level: str) -> None:
    """Sets up root logging for the command-line entry point."""
    logging.basicConfig(format=LOGGING_FORMAT, level=getattr(logging, level.upper()))
