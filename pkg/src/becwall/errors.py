"""Exception types raised by the solver and its I/O layer."""

from __future__ import annotations


class BecWallError(Exception):
    """Base class for all package errors."""


class DegenerateRadius(BecWallError, ValueError):
    """Polar radius R = 1 - eps^2 w is not positive."""


class EpsilonZero(BecWallError, ValueError):
    """An operation that divides by eps was handed eps = 0."""


class AngleOutOfRange(BecWallError, ValueError):
    """A profile angle left the closed first quadrant beyond roundoff."""


class MeshTooCoarse(BecWallError):
    """Local step error of the reduced integrator exceeds tolerance."""


class MultipleCrossings(BecWallError):
    """u - v changes sign more than once, so the profile has no unique center."""


class _IterateError(BecWallError):
    def __init__(self, message: str, profile=None, eps: float | None = None):
        super().__init__(message)
        self.profile = profile
        self.eps = eps


class SingularJacobian(_IterateError):
    """Banded elimination broke down; ``profile`` is the last iterate."""


class NoConvergence(_IterateError):
    """Newton or the continuation ladder stalled; ``profile`` is the last iterate."""


class MalformedFile(BecWallError, ValueError):
    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class SchemaMismatch(BecWallError, ValueError):
    """CSV header does not match the expected column set."""
