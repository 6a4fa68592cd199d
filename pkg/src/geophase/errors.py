"""Exception hierarchy shared by all geophase modules."""


class GeophaseError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GeophaseError, ValueError):
    """An argument violates a documented precondition."""


class ConfigurationError(GeophaseError, ValueError):
    """A run configuration is inconsistent (bad step size, missing seed, ...)."""


class OutOfRangeError(InvalidInputError):
    """A time lies outside the window of a pulse sequence."""


class NumericalError(GeophaseError, RuntimeError):
    """The numerics failed (divergence, lost normalization, ...)."""


class DegeneracyCrossingError(NumericalError):
    """The tracked eigen-subspace changed dimension."""

    def __init__(self, time, expected_dim, found_dim):
        self.time = float(time)
        self.expected_dim = expected_dim
        self.found_dim = found_dim
        super().__init__(
            f"subspace dimension changed from {expected_dim} to {found_dim} at t={self.time:.6g}"
        )
