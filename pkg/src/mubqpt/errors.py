"""Exception hierarchy shared across the package."""


class MubQptError(Exception):
    """Base class for every error raised by this package."""


class ValidationError(MubQptError):
    """An input violates a documented precondition or file format."""


class NumericalError(MubQptError):
    """A numerical identity or tolerance check failed during computation."""
