"""Exception types shared across the package."""


class EscatError(Exception):
    """Base class for all escat errors."""


class DomainError(EscatError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class RangeError(EscatError, ValueError):
    """An index or order exceeds the supported range."""


class ResonanceError(EscatError, RuntimeError):
    """A linear system is singular or nearly singular.

    Raised when an assembled operator looks resonant (interior Dirichlet
    eigenvalue nearby) or a layer/interface matrix is not invertible.
    """


class ReconstructionError(EscatError, RuntimeError):
    """Least-squares reconstruction cannot proceed (rank deficiency etc.)."""


class ConfigError(EscatError, ValueError):
    """A configuration document failed validation."""
