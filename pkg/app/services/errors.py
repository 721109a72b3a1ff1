"""Error types raised by the services.

Everything derives from ValueError so callers can keep catching ValueError
and map it to a config/usage failure at the outer layer.
"""
from __future__ import annotations

__all__: list[str] = [
    "LabError",
    "ParameterError",
    "DomainError",
    "SingularityError",
    "DegenerateError",
    "SizeError",
    "RegressionError",
    "SchemaError",
    "DuplicateClaimError",
    "CycleError",
    "MappingError",
    "EmptyDiagramError",
]


class LabError(ValueError):
    """Base class for all ghostlab errors."""


class ParameterError(LabError):
    """Parameters violate the invariants of their type."""


class DomainError(LabError):
    """A point lies outside the unit square."""


class SingularityError(LabError):
    """A derivative is undefined at z = 0 without regularization."""


class DegenerateError(LabError):
    """A quantity that must be strictly positive vanished."""


class SizeError(LabError):
    """A grid or offset does not fit the requested size."""


class RegressionError(LabError):
    """A log-log fit could not be carried out."""


class SchemaError(LabError):
    """A CSV file does not carry the expected header."""


class DuplicateClaimError(LabError):
    pass


class CycleError(LabError):
    pass


class MappingError(LabError):
    pass


class EmptyDiagramError(LabError):
    pass
