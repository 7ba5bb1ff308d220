"""Exception hierarchy.

Each pipeline failure mode maps to one CLI exit code (see :mod:`sfsbc.cli`).
"""


class SFSError(Exception):
    exit_code = 1


class BadInputError(SFSError, ValueError):
    """Malformed file, invalid parameter, out-of-grid pixel."""

    exit_code = 2


class DegenerateImageError(SFSError):
    """No usable singular point, or the image is essentially flat."""

    exit_code = 3


class InfeasibleConfigurationError(SFSError):
    """Edge weights cannot be closed around cycles within tolerance."""

    exit_code = 4


class UnresolvedAmbiguityError(SFSError):
    """Not enough boundary information to fix the sign of some class."""

    exit_code = 5


class InconsistentAnchorsError(SFSError):
    """Both candidate signs disagree with the anchor depths."""

    exit_code = 5


class PathTraceError(SFSError):
    exit_code = 1
