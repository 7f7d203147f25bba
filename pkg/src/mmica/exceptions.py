"""Exception hierarchy shared across the package."""


class MmicaError(Exception):
    """Base class for all mmica-specific errors."""


class DomainError(MmicaError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class UnsupportedConjugate(MmicaError):
    """The density has no closed-form conjugate f(u)."""


class DimensionMismatch(MmicaError, ValueError):
    """Array shapes are inconsistent with each other."""


class NotPositiveDefinite(MmicaError):
    """A matrix that must be positive definite is not."""


class SingularMatrix(MmicaError):
    """det(W) = 0 where an invertible matrix is required."""


class DegenerateStats(MmicaError):
    """Sufficient statistics too degenerate for a row update."""


class DegenerateRow(MmicaError):
    """A row or column of R = WA is identically zero."""


class RankDeficient(MmicaError):
    """Covariance matrix is numerically rank deficient."""


class Diverged(MmicaError):
    """A solver run produced a non-finite or exploding loss."""


class FormatError(MmicaError):
    """A data file has a bad magic number, version, or shape."""


class ChecksumError(FormatError):
    """Payload checksum does not match the stored value."""


class IoError(MmicaError):
    """Reading or writing an artifact file failed at the OS level."""
