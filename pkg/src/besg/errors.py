"""Exception types shared across the package."""

from __future__ import annotations


class BesgError(Exception):
    """Base class for all errors raised by this package."""


class InvalidSpec(BesgError, ValueError):
    pass


class SpecTooLarge(BesgError, ValueError):
    pass


class NotFound(BesgError, LookupError):
    pass


class NotAbelian(BesgError, ValueError):
    pass


class InvalidSubgroup(BesgError, ValueError):
    pass


class OutOfUniverse(BesgError, ValueError):
    pass


class OutOfRange(BesgError, ValueError):
    pass


class BudgetTooSmall(BesgError, ValueError):
    pass


class GridTooSmall(BesgError, ValueError):
    pass


class DimensionTooSmall(BesgError, ValueError):
    pass


class CapExceeded(BesgError, ValueError):
    pass


class Infeasible(BesgError, ValueError):
    pass


class BudgetExceeded(BesgError, RuntimeError):
    pass


class SearchFailed(BesgError):
    """Raised when a desk-scale search stage finds nothing.

    ``stage`` names the step of the pipeline that came up empty.
    """

    def __init__(self, stage: str, detail: str = ""):
        self.stage = stage
        self.detail = detail
        super().__init__(f"search failed at stage {stage!r}" + (f": {detail}" if detail else ""))
