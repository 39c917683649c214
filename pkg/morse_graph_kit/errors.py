"""Exception hierarchy for morse-graph-kit.

Every error raised on purpose by the package derives from
:class:`MorseGraphKitError`. Errors about malformed values also derive from
:class:`ValueError` so plain ``except ValueError`` callers keep working.
"""

from __future__ import annotations

from typing import Any


class MorseGraphKitError(Exception):
    """Base class for all package errors."""


class DimensionError(MorseGraphKitError, ValueError):
    """Matrix or endomorphism block shapes do not match the basis."""


class NoSolution(MorseGraphKitError):
    """The complex is not acyclic, so no propagator exists.

    Attributes:
        certificate: Homology dimension per degree (only nonzero entries).
    """

    def __init__(self, message: str, certificate: dict[int, int]):
        super().__init__(message)
        self.certificate = dict(certificate)


class InconsistentInput(MorseGraphKitError, ValueError):
    """The requested linear system has no solution for the given data."""


class InvalidHomotopy(MorseGraphKitError, ValueError):
    """A handle-slide map is not square-zero."""


class DuplicateBasisName(MorseGraphKitError, ValueError):
    """Two generators share a name."""


class MalformedGraph(MorseGraphKitError, ValueError):
    """Graph data violates the structural rules of the graph model."""


class InvalidDegree(MorseGraphKitError, ValueError):
    """Degree vector outside the range an operation supports."""


class DegreeError(MorseGraphKitError, ValueError):
    """Endomorphism degree does not match the colors it is evaluated on."""


class WellDefinednessViolation(MorseGraphKitError):
    """A map on a quotient sends a relation to a nonzero element.

    Attributes:
        row: The offending relation, as a mapping from graph keys to coefficients.
    """

    def __init__(self, message: str, row: dict[Any, Any]):
        super().__init__(message)
        self.row = row


class IntegrationFailure(MorseGraphKitError, RuntimeError):
    """The ODE integrator failed, blew up or looped between charts."""


class NonGeneric(MorseGraphKitError):
    """The geometric data is not in general position."""


class Unresolved(MorseGraphKitError):
    """Independent seed grids found different solution sets."""


class DomainError(MorseGraphKitError, ValueError):
    """Argument outside the domain where a formula converges."""


class InvalidCounts(MorseGraphKitError, ValueError):
    """A counts vector violates the boundary constraints.

    Attributes:
        violations: One entry per violated constraint row.
    """

    def __init__(self, message: str, violations: list[dict[str, Any]]):
        super().__init__(message)
        self.violations = violations


class ConfigError(MorseGraphKitError, ValueError):
    """Configuration file or option is malformed.

    Attributes:
        key: Dotted path of the offending key.
    """

    def __init__(self, message: str, key: str):
        super().__init__(f"{key}: {message}")
        self.key = key
