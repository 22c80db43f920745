"""Exception types shared across the package.

Each exception maps to one CLI exit code (see :mod:`higman_lines.cli`).
"""


class HigmanLinesError(Exception):
    exit_code = 1


class ValidationError(HigmanLinesError, ValueError):
    """Bad parameters or malformed input."""

    exit_code = 2


class TruncationInsufficient(HigmanLinesError):
    """The finite ball is too small to certify a verdict either way."""

    exit_code = 3


class ResourceCapExceeded(HigmanLinesError):
    exit_code = 4


class ChartInconsistency(HigmanLinesError, AssertionError):
    """Raised when chart gluing would violate a link invariant.

    This always indicates a bug in the builder, never valid output.
    """

    exit_code = 1
