"""Exception hierarchy shared by all modules."""

from __future__ import annotations


class LoewnerLabError(Exception):
    """Base class for every error raised by the package."""


class NumericError(LoewnerLabError):
    """Failures of a numerical procedure (mapped to exit code 3 by the CLI)."""


class PoleAtDrivingPoint(NumericError):
    pass


class StepUnderflow(NumericError):
    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (knot {index})")
        self.index = index


class SwallowedByHull(NumericError):
    pass


class DegenerateCurve(NumericError):
    pass


class SelfIntersection(NumericError):
    pass


class NonBoundaryStart(NumericError):
    pass


class GridMismatch(LoewnerLabError):
    pass


class HypothesisFailed(LoewnerLabError):
    def __init__(self, which: str, detail: str = ""):
        super().__init__(f"hypothesis ({which}) failed" + (f": {detail}" if detail else ""))
        self.which = which


class OriginExcluded(LoewnerLabError):
    pass


class StepBudgetExceeded(NumericError):
    pass


class NonSimplePolygon(LoewnerLabError):
    pass


class DomainError(LoewnerLabError):
    pass


class Disconnected(NumericError):
    pass


class ConfigInvalid(LoewnerLabError):
    def __init__(self, field: str, message: str):
        super().__init__(f"{field}: {message}")
        self.field = field
