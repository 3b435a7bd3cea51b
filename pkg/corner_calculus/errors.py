"""
Errors
------
Exception hierarchy for the corner calculus. Every error is a ValueError so callers that
only care about bad input can catch the builtin.
"""

from __future__ import annotations

from typing import Any


class CornerCalculusError(ValueError):
    """Root of all library errors."""


class DomainError(CornerCalculusError):
    """Sizes, charts or labels do not match."""


class PreconditionError(CornerCalculusError):
    """An operation was called outside its documented preconditions."""


class UnsupportedComposition(CornerCalculusError):
    """A composite leaves the monomial-affine class."""


class NotPPositioned(CornerCalculusError):
    """A center is not a p-submanifold in some chart it meets."""

    def __init__(self, center: str, chart: Any) -> None:
        self.center = center
        self.chart = chart
        super().__init__(f"Center '{center}' is not p-positioned in chart {chart}")


class LiftLeavesAffineClass(CornerCalculusError):
    """A proper transform is not affine in the blown-up chart."""


class StepError(CornerCalculusError):
    """A resolution step failed; `index` is the 0-based position in the order."""

    def __init__(self, index: int, center: str, reason: str = "") -> None:
        self.index = index
        self.center = center
        self.reason = reason
        msg = f"Resolution step {index} ('{center}') failed"
        super().__init__(f"{msg}: {reason}" if reason else msg)


class ChartCoverageError(CornerCalculusError):
    """A lifted chart has no target chart containing its image."""


class ModelError(CornerCalculusError):
    """A generalized product model is internally inconsistent."""


class UnsupportedCenter(CornerCalculusError):
    """The center cannot be blown up in the affine chart model."""
