"""Exception types shared across the package."""

from __future__ import annotations


class VLCError(Exception):
    """Base class for all errors raised by this package."""


class DegenerateGeometry(VLCError):
    """Geometry too degenerate to operate on (collapsed ring, empty path, zero-area band)."""


class OutOfBounds(VLCError):
    """A query point lies outside the scene bounds."""


class MissingCorridor(VLCError):
    """A path segment has no corridor cross-section associated with it."""


class UnknownAttribute(VLCError):
    """Attribute id is not one of the six supported attributes."""


class InvalidScore(VLCError):
    """Score or aggregate value outside its legal range."""


class EmptyReport(VLCError):
    """Aggregation requested over an empty set of attribute classes."""


class ParseError(VLCError):
    """Document violates the schema. Carries a JSON-pointer to the offending location."""

    def __init__(self, message: str, pointer: str):
        super().__init__(f"{pointer}: {message}")
        self.pointer = pointer
        self.reason = message


class ValidationError(VLCError):
    """Document parsed but a geometric/semantic invariant fails."""


class InfeasibleRequest(VLCError):
    """Manipulation request cannot be satisfied under its hard constraints."""
