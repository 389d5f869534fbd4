"""Exception types raised across the package."""

__all__ = ["DomainError", "IterationLimitError", "UnidentifiableError", "DegenerateCountError"]


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class IterationLimitError(RuntimeError):
    """An iterative solver hit its iteration cap before converging.

    The last iterate and the residual at that point are kept so callers can
    decide whether the partial result is usable.
    """

    def __init__(self, message, last_iterate=None, residual=None):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.residual = residual


class UnidentifiableError(ValueError):
    """The data carry no information about the requested parameter."""


class DegenerateCountError(ValueError):
    """Bin counts sit on the boundary where the closed-form MLE diverges."""
