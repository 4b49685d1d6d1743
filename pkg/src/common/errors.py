"""Error types shared by every package.

Validation problems are raised as ValidationError, numerical breakdowns
(non-finite values, failed brackets) as NumericalError. The CLI maps the
two families onto exit codes 2 and 3; anything else is an internal
failure and exits with 1.
"""

from typing import List

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3


class ValidationError(ValueError):
    """Input rejected before any computation was attempted."""


class NumericalError(ArithmeticError):
    """Computation produced non-finite values or failed to converge."""


class DiscrepancyBracketError(NumericalError):
    """The discrepancy principle could not bracket its target."""


def raise_on_errors(errors: List[str]) -> None:
    """Raise ValidationError with the first message of a validator result."""
    if errors:
        raise ValidationError(errors[0])


def exit_code_for(exc: BaseException) -> int:
    """2 for bad input (including unreadable files), 3 for numerical failure, 1 otherwise."""
    if isinstance(exc, ArithmeticError):
        return EXIT_NUMERICAL
    if isinstance(exc, (ValueError, OSError, KeyError)):
        return EXIT_VALIDATION
    return EXIT_FAILURE
