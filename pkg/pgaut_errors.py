"""
Error taxonomy for pgaut.

Every error raised on purpose by the library derives from PgautError, so the
CLI can map failures to exit codes without guessing.
"""

from typing import Optional, Tuple


class PgautError(Exception):
    """Base class for all pgaut errors."""


class PresentationSyntaxError(PgautError, ValueError):
    """A presentation file does not follow the grammar."""

    def __init__(self, message: str, line: int = 0, column: int = 0):
        self.line = line
        self.column = column
        location = f"line {line}, column {column}: " if line else ""
        super().__init__(f"{location}{message}")


class WeightingError(PresentationSyntaxError):
    """A relation word uses a generator that is not deeper than its left side."""


class ConsistencyError(PgautError, ValueError):
    """A power-commutator presentation failed an overlap test."""

    def __init__(self, message: str, overlap: Optional[Tuple[str, Tuple[int, ...]]] = None):
        self.overlap = overlap
        super().__init__(message)


class CapExceededError(PgautError):
    """A size cap was hit; the result would not be exhaustive."""

    def __init__(self, cap: str, limit: int, requested: int):
        self.cap = cap
        self.limit = limit
        self.requested = requested
        super().__init__(f"{cap} exceeded: requested {requested}, limit {limit}")


class AbelianGroupError(PgautError, ValueError):
    """The operation only makes sense for non-abelian groups."""


class NotNormalError(PgautError, ValueError):
    """Quotient requested by a subgroup that is not normal."""


class HypothesisViolationError(PgautError, ValueError):
    """A documented precondition of a construction does not hold."""


class VerificationError(PgautError):
    """An exhaustive check failed; `check` names the first failing one."""

    def __init__(self, check: str, message: str = ""):
        self.check = check
        super().__init__(f"{check}: {message}" if message else check)


class SchemaVersionError(PgautError, ValueError):
    """A certificate was written with another schema version."""
