"""Exception types shared across the engine.

Every error that can surface through the CLI or the HTTP service derives from
OdflowError so callers can map them to exit code 2 / HTTP 4xx uniformly.
"""

from __future__ import annotations


class OdflowError(Exception):
    """Base class for all validation and domain errors."""

    kind = "Error"

    def to_dict(self) -> dict:
        return {"type": self.kind, "message": str(self)}


class ParseError(OdflowError):
    kind = "ParseError"

    def __init__(self, message: str, *, line: int | None = None, feature: int | None = None):
        super().__init__(message)
        self.line = line
        self.feature = feature

    def to_dict(self) -> dict:
        d = super().to_dict()
        if self.line is not None:
            d["line"] = self.line
        if self.feature is not None:
            d["feature"] = self.feature
        return d


class UnknownRegionError(OdflowError):
    kind = "UnknownRegion"


class DuplicateFlowError(OdflowError):
    kind = "DuplicateFlow"


class NegativeMagnitudeError(OdflowError):
    kind = "NegativeMagnitude"


class InvalidRangeError(OdflowError):
    kind = "InvalidRange"


class OverlappingGroupsError(OdflowError):
    kind = "OverlappingGroups"


class OutOfBoundsError(OdflowError):
    kind = "OutOfBounds"


class InvalidSpacingError(OdflowError):
    kind = "InvalidSpacing"


class InfeasibleGeometryError(OdflowError):
    kind = "InfeasibleGeometry"


class BadGridAssignmentError(OdflowError):
    kind = "BadGridAssignment"


class UnknownSelectionError(OdflowError):
    kind = "UnknownSelection"


class AntipodalAmbiguityError(OdflowError):
    kind = "AntipodalAmbiguity"

    def __init__(self, message: str, flows: list[str] | None = None):
        super().__init__(message)
        self.flows = flows or []

    def to_dict(self) -> dict:
        d = super().to_dict()
        d["flows"] = list(self.flows)
        return d


class CorrespondenceMismatchError(OdflowError):
    kind = "CorrespondenceMismatch"


class LayoutError(OdflowError):
    kind = "LayoutError"
