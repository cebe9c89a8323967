"""Jacobi expansions, Jacobi--Riesz and T_M kernels, weights, and Riesz transforms on rank-one spaces."""

from .errors import (
    AccuracyError,
    ConfigurationError,
    DiagonalError,
    DomainError,
    JacobiError,
    UnsupportedRangeError,
)
from .special import JacobiParams, OffsetScheme, QuadratureRule
from .transforms import ManifoldParams, Spectrum

__all__ = [
    "AccuracyError",
    "ConfigurationError",
    "DiagonalError",
    "DomainError",
    "JacobiError",
    "UnsupportedRangeError",
    "JacobiParams",
    "OffsetScheme",
    "QuadratureRule",
    "ManifoldParams",
    "Spectrum",
]
