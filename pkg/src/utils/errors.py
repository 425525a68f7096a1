"""
Exception hierarchy shared by the library, the controllers and the CLI.

Library code raises; controllers catch KacGapError (and raw numpy/scipy
failures, wrapped as NumericalError) and turn it into (success, payload, error)
tuples; the CLI maps the class to an exit code.
"""

import numpy as np


class KacGapError(Exception):
    """Base class for every error raised by this package."""
    pass


class DomainError(KacGapError, ValueError):
    """Raised when an input violates an operation's preconditions."""
    pass


class ConfigError(DomainError):
    """Raised for invalid run configurations (flags, config files, env vars)."""
    pass


class NumericalError(KacGapError, ArithmeticError):
    """Raised when a computation cannot produce a trustworthy number."""
    pass


class BoundViolation(NumericalError):
    """Raised when an inequality the library asserts turns out false."""
    pass


class DegenerateProfileError(NumericalError):
    """Raised when a quotient is requested for a zero trial profile."""
    pass


# Raw failures from numpy/scipy that controllers report as NumericalError
NUMERIC_FAILURES = (ArithmeticError, np.linalg.LinAlgError)


def as_numerical_error(error: BaseException) -> NumericalError:
    """Wrap a raw numeric failure, keeping it as the cause."""
    if isinstance(error, NumericalError):
        return error
    wrapped = NumericalError(f"{type(error).__name__}: {error}")
    wrapped.__cause__ = error
    return wrapped


def exit_code_for(error: BaseException) -> int:
    """
    Map an exception to the CLI exit code.

    Returns:
        2 for validation problems, 3 for numerical failures, 1 otherwise
    """
    if isinstance(error, DomainError):
        return 2
    if isinstance(error, NumericalError):
        return 3
    return 1
