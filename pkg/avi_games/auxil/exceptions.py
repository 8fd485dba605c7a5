class ApplicationException(Exception):
    """Base class for all custom exceptions within the application."""
