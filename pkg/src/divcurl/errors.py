"""Exception hierarchy shared by all modules."""


class DivCurlError(Exception):
    """Base class for all errors raised by :mod:`divcurl`."""


class ConfigurationError(DivCurlError, ValueError):
    """Invalid domain, grid or run configuration."""


class StencilError(DivCurlError):
    """A finite-difference stencil cannot be formed on the field support."""


class OutOfDomainError(DivCurlError):
    """A point lies outside the region where a field has valid samples."""


class FormatError(DivCurlError):
    """A field file is malformed or truncated."""


class SingularPointError(DivCurlError, ValueError):
    """A kernel was evaluated at its singularity."""


class PreconditionError(DivCurlError):
    """Input data violates a mathematical precondition of an operator.

    ``residual`` carries the relative residual that failed the check and
    ``tolerance`` the threshold it was compared against.
    """

    def __init__(self, message, residual=None, tolerance=None):
        super().__init__(message)
        self.residual = residual
        self.tolerance = tolerance


class SolverError(DivCurlError):
    """An iterative solver failed to converge."""

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = list(history) if history is not None else []
