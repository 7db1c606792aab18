"""Exception hierarchy shared by every module.

Each class maps to one CLI exit code (see ``ultrawalk.cli``).
"""

from __future__ import annotations


class UltrawalkError(Exception):
    exit_code = 1
    kind = "error"


class DomainError(UltrawalkError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""

    exit_code = 2
    kind = "domain"


class ValidationError(UltrawalkError, ValueError):
    """A parameter set violates a structural invariant (ordering, grid, window)."""

    exit_code = 2
    kind = "validation"


class ResourceCapError(UltrawalkError, RuntimeError):
    """A dense construction would exceed the configured size cap."""

    exit_code = 3
    kind = "resource"

    def __init__(self, message: str, cap: int):
        super().__init__(f"{message} (dense cap = {cap})")
        self.cap = cap


class OracleMismatchError(UltrawalkError, ArithmeticError):
    exit_code = 4
    kind = "numerical"
