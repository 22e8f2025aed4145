"""Exception types shared across the package."""


class FscError(Exception):
    """Base class for all package errors."""


class DataError(FscError):
    """Invalid input data: malformed files, bad manifests, violated preconditions."""


class InvariantError(FscError):
    """An internal consistency check failed. Indicates a bug, not bad input."""
