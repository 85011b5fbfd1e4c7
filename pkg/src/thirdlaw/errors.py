"""Exception hierarchy shared by all modules."""


class ThirdLawError(Exception):
    """Base class for every error raised by the package."""


class ArgumentError(ThirdLawError, ValueError):
    pass


class DomainError(ThirdLawError, ValueError):
    """A parameter lies outside its model's domain."""


class TruncationError(ThirdLawError):
    """The truncation cap was reached before the tail weight fell below tolerance."""

    def __init__(self, message, tail_weight):
        super().__init__(message)
        self.tail_weight = tail_weight


class NumericalError(ThirdLawError):
    """Quadrature or root finding failed to converge."""

    def __init__(self, message, estimate=None):
        super().__init__(message)
        self.estimate = estimate


class StructureError(ThirdLawError):
    """Source and target spectra have incompatible level structure."""


class ProtocolError(ThirdLawError):
    pass


class ProjectionError(ThirdLawError):
    """Projection onto an outcome with zero Born probability."""


class ModelError(ThirdLawError):
    pass


class ValidationError(ThirdLawError, ValueError):
    """Invalid state vector, thermal state or configuration."""
