"""Exception hierarchy shared by every santalab module.

Each exception carries the process exit code the command-line front-end uses
when the error escapes a subcommand, so scripts can tell usage problems apart
from resource caps.
"""

from __future__ import annotations

from typing import ClassVar


class SantaLabError(Exception):
    """Base class for all errors raised by the library."""

    exit_code: ClassVar[int] = 2


class DimensionError(SantaLabError, ValueError):
    """Vectors or matrices whose shapes do not line up."""


class DomainError(SantaLabError, ValueError):
    """Inputs outside the mathematical domain of an operation."""


class ConfigError(SantaLabError, ValueError):
    """Invalid parameters or unknown names in a configuration record."""


class DataError(SantaLabError, ValueError):
    """Malformed persisted data or inconsistent run records."""


class ProtocolError(SantaLabError, RuntimeError):
    """An online policy was driven outside its step protocol."""


class SizeCapError(SantaLabError, RuntimeError):
    """An exact solver refused an instance above its size cap."""

    exit_code: ClassVar[int] = 3


class NumericalError(SantaLabError, ArithmeticError):
    """A numerical routine failed to converge or detected a breakdown."""

    exit_code: ClassVar[int] = 3


__all__ = [
    "ConfigError",
    "DataError",
    "DimensionError",
    "DomainError",
    "NumericalError",
    "ProtocolError",
    "SantaLabError",
    "SizeCapError",
]
