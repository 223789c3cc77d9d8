"""Exception types shared across the package."""


class InputError(ValueError):
    """Raised when a caller passes arguments outside an operation's domain."""


class ValidationError(InputError):
    """Raised when a record or file fails structural validation."""


class ConvergenceError(RuntimeError):
    """Raised when a bisection exceeds its iteration guard."""
