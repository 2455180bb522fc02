"""Exception types raised by the srde package."""


class SRDEError(Exception):
    """Base class for all package errors."""


class DomainError(SRDEError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class FitError(SRDEError, RuntimeError):
    """The series fit could not produce a feasible, positive density."""


class DegenerateFrameError(SRDEError, ValueError):
    """All neighbors coincide with the query, so no local scale exists."""


class DataError(SRDEError, ValueError):
    """Malformed or inconsistent input data."""


class ModelFormatError(DataError):
    """A persisted model file could not be read back."""


class VersionError(ModelFormatError):
    pass


class ChecksumError(ModelFormatError):
    pass
