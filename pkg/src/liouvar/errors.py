"""Exception hierarchy shared by every module."""


class LiouvarError(Exception):
    """Base class for all package errors."""


class DomainError(LiouvarError, ValueError):
    """An argument lies outside the operation's domain or desk-scale guard."""


class EmptyRangeError(DomainError):
    pass


class RangeOverflowError(DomainError, OverflowError):
    """The requested range does not fit in 64 bits."""


class RangeNotMaterializedError(LiouvarError, LookupError):
    """A value was requested outside the materialized coverage."""


class ConfigurationError(LiouvarError, ValueError):
    pass


class UndersampledError(LiouvarError, ValueError):
    """Quadrature step too coarse for the oscillation of the integrand."""


class DegenerateInputError(LiouvarError, ValueError):
    pass


class HScanError(LiouvarError):
    """An h-scan aborted; ``partial`` holds the reports computed before the failure."""

    def __init__(self, message, partial, cause=None):
        super().__init__(message)
        self.partial = list(partial)
        self.cause = cause


class StorageError(LiouvarError, OSError):
    pass


class SegmentFormatError(StorageError):
    """Bad magic or unsupported version."""


class CRCMismatchError(StorageError):
    pass


class TruncatedSegmentError(StorageError):
    pass
