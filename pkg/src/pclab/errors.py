"""Exception taxonomy shared by all pclab modules.

The CLI maps these onto exit codes: argument/validation problems exit 2,
coverage/resource problems exit 3, I/O problems exit 4.
"""


class PclabError(Exception):
    """Base class for all pclab errors."""


class InvalidArgumentError(PclabError, ValueError):
    """An argument violates a documented precondition."""


class OutOfRangeError(PclabError):
    """A query point lies outside the range covered by a table."""


class CoverageError(PclabError):
    """A zero table does not cover the requested height."""


class ResourceLimitError(PclabError):
    """A memory estimate exceeds the configured cap."""


class PoleError(PclabError):
    """Evaluation requested at the pole s = 1."""


class HeightCapError(PclabError):
    """Requested tolerance is unachievable at the requested height."""


class BelowHeightError(PclabError):
    """Evaluation requested below the minimum supported height."""


class NearSingularityError(PclabError):
    """Evaluation point too close to a zero of zeta."""


class MissedZeroError(PclabError):
    """Zero count disagrees with the counting formula."""


class ZeroFileError(PclabError):
    """Problem with a zero-ordinate file (details in subclasses)."""

    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


class ValidationError(ZeroFileError):
    """Malformed or non-monotone zero file; `line` is the first offender."""


class WrongFileError(ZeroFileError):
    """File does not start at the first zero ordinate."""


class EmptyInputError(ZeroFileError):
    """File contains no ordinates."""


class GridRangeError(PclabError):
    """Requested window or range not covered by a computed grid."""
