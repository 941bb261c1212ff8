"""Exception types shared by the library modules and the shell.

Each error carries the process exit code the shell reports for it:
1 usage/config, 2 data, 3 insufficient data from fitters.
"""


class IBNetError(Exception):
    exit_code = 1


class ParameterError(IBNetError, ValueError):
    """Invalid model, fitting or command parameters."""
    exit_code = 1


class DomainError(ParameterError):
    """Argument outside the mathematical domain of a function."""


class DataFormatError(IBNetError, ValueError):
    """Input file is missing, malformed or has the wrong header."""
    exit_code = 2


class UndefinedMetricError(IBNetError, ValueError):
    """Metric is not defined for the given input (e.g. an empty network)."""
    exit_code = 2


class OutOfRangeError(IBNetError, ValueError):
    exit_code = 2


class ConsistencyError(IBNetError, RuntimeError):
    """Internal invariant broken, e.g. an edge without a probability."""
    exit_code = 2


class InsufficientDataError(IBNetError, ValueError):
    """Too few (or degenerate) samples for a fitter."""
    exit_code = 3


def exit_code_for(error):
    """
    Map an exception to the shell exit code.

    Args:
        error (BaseException): The exception raised by a command.

    Returns:
        int: 1, 2 or 3.
    """
    if isinstance(error, IBNetError):
        return error.exit_code
    if isinstance(error, OSError):
        return 2
    return 1
