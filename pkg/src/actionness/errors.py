"""Exception types shared across the package."""


class InvalidInputError(ValueError):
    """An argument violates a documented precondition or invariant."""


class NumericError(RuntimeError):
    """A numeric routine produced or encountered a non-finite value."""


class PackingError(RuntimeError):
    """Synthetic instance placement could not be completed."""
