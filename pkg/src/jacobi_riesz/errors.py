"""Exception hierarchy shared by every module."""


class JacobiError(Exception):
    """Base class for library errors."""


class DomainError(JacobiError, ValueError):
    """An argument lies outside the domain of the operation."""


class UnsupportedRangeError(DomainError):
    """Parameters are valid Jacobi types but outside the supported kernel range (alpha, beta > -1/2)."""


class DiagonalError(DomainError):
    """A kernel was evaluated on the diagonal theta == varphi."""


class ConfigurationError(JacobiError, ValueError):
    """Discretisation settings cannot resolve the requested quantity."""


class AccuracyError(JacobiError, RuntimeError):
    """Adaptive quadrature hit its refinement cap before converging."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})
