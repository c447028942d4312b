"""Exception hierarchy shared across the package."""

from __future__ import annotations


class CkstabError(Exception):
    """Base class for all package-specific errors."""


class PoleError(CkstabError, ValueError):
    """Gamma evaluated at a nonpositive integer."""


class MLConvergenceError(CkstabError, ArithmeticError):
    """No Mittag-Leffler evaluation regime reached its tolerance.

    ``achieved`` carries the best relative error estimate obtained before
    giving up (``math.inf`` if nothing usable was computed).
    """

    def __init__(self, message: str, achieved: float = float("inf")):
        super().__init__(f"{message} (achieved relative error ~{achieved:.3g})")
        self.achieved = achieved


class SectorConditionError(CkstabError, ValueError):
    """An eigenvalue violates |arg(lambda)| > alpha*pi/2."""


class GridError(CkstabError, ValueError):
    """Sampled data is not on a uniform transformed-time grid."""


class OrderError(CkstabError, ValueError):
    """Fractional order outside the operation's admissible range."""


class EigenvalueConvergenceError(CkstabError, RuntimeError):
    """QR iteration failed; ``partial`` holds the Hessenberg reduction."""

    def __init__(self, message: str, partial=None):
        super().__init__(message)
        self.partial = partial


class DefectiveMatrixError(CkstabError, ValueError):
    """Matrix is numerically defective and no Jordan block data was supplied."""


class UnstableSpectrumError(CkstabError, ValueError):
    """Certification requested for a matrix that fails the sector test."""


class BoundaryInconclusiveError(CkstabError, ValueError):
    """Some eigenvalue argument sits within tolerance of the sector boundary."""


class ConfigError(CkstabError, ValueError):
    """System configuration file violates the documented schema."""
