"""Exception and warning types shared across the package."""


class MaxStabError(Exception):
    """Base class for all package errors."""


class ValidationError(MaxStabError, ValueError):
    """An input violates a documented contract (domain, shape, tolerance)."""


class NotSupportedError(MaxStabError):
    """The requested operation is not available for this model family."""


class ConvergenceWarning(UserWarning):
    """A numeric routine hit its budget before reaching the requested accuracy."""
