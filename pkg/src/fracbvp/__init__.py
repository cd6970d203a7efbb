"""Fractional p-Laplacian boundary value problems: quadrature, kernels, solvers and exact polynomial identities."""

from .errors import (
    ConsistencyWarning,
    Diverged,
    DomainError,
    ExprDomainError,
    ExprSyntaxError,
    FracBVPError,
    MaxIterExceeded,
    NumericFailure,
    QuadratureError,
    RangeWarning,
    ResourceError,
    ValidationError,
)

__version__ = "0.1.0"

__all__ = [
    "ConsistencyWarning",
    "Diverged",
    "DomainError",
    "ExprDomainError",
    "ExprSyntaxError",
    "FracBVPError",
    "MaxIterExceeded",
    "NumericFailure",
    "QuadratureError",
    "RangeWarning",
    "ResourceError",
    "ValidationError",
]
