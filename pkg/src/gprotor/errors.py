"""Exception hierarchy."""


class GprotorError(Exception):
    """Base class for all package errors."""


class ConfigurationError(GprotorError, ValueError):
    """Invalid grid, parameters or run configuration."""


class DomainError(ConfigurationError):
    """Requested geometry does not fit inside the computational box."""


class PreconditionError(GprotorError, ValueError):
    """An operation was called outside the regime where it is well posed."""


class DegenerateInputError(GprotorError, ValueError):
    pass


class UnsupportedCaseError(GprotorError, NotImplementedError):
    pass


class NoResonanceError(GprotorError, ValueError):
    pass


class DiscretizationError(GprotorError, ArithmeticError):
    """A quantity that must be real (or finite) is not, beyond roundoff."""


class DivergenceError(GprotorError, FloatingPointError):
    pass


class InstabilityError(GprotorError, FloatingPointError):
    """Time stepping produced non-finite values.

    ``series`` holds the records gathered before the failure.
    """

    def __init__(self, message, step=None, series=None):
        super().__init__(message)
        self.step = step
        self.series = series


class EnergyDriftError(GprotorError, RuntimeError):
    def __init__(self, message, series=None):
        super().__init__(message)
        self.series = series


class BoundaryEscapeError(GprotorError, RuntimeError):
    pass


class SnapshotError(GprotorError, IOError):
    code = "snapshot"


class SnapshotVersionError(SnapshotError):
    code = "version-mismatch"


class SnapshotTruncatedError(SnapshotError):
    code = "truncated-payload"


class SnapshotSizeError(SnapshotError):
    code = "size-disagreement"
