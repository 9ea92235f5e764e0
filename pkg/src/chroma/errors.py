"""Exception types shared across the package.

Each class carries an ``exit_code`` so the command line can map failures to
distinct process exit statuses.
"""


class ChromaError(Exception):
    exit_code = 1


class InfeasibleBoundary(ChromaError):
    """The partial coloring has no proper extension."""

    exit_code = 3


class SizeCapError(ChromaError):
    """An instance exceeds a configured enumeration or memory cap."""

    exit_code = 4


class InvalidInput(ChromaError):
    """Malformed graph, coloring, set or parameter."""

    exit_code = 5


class NonCoalescence(ChromaError):
    """Coupling from the past did not coalesce within the allowed horizon."""

    exit_code = 6
