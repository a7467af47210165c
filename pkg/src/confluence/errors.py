"""Exception hierarchy for the confluence-search package."""

from __future__ import annotations


class ConfluenceError(Exception):
    """Base class for all package-specific errors."""


class PrecisionError(ConfluenceError):
    """Requested or achievable precision is insufficient for the operation."""


class DomainError(ConfluenceError):
    """An argument lies outside the mathematical domain of the operation."""


class PoleProximityError(DomainError):
    """Evaluation was requested too close to the pole of zeta at s = 1."""


class EvaluationCeilingError(ConfluenceError):
    """The requested t exceeds the configured zeta-evaluation ceiling.

    Carries the offending t so callers can report "unverifiable at this
    scale" instead of silently skipping the point.
    """

    def __init__(self, t: float, ceiling: float):
        self.t = t
        self.ceiling = ceiling
        super().__init__(
            f"t = {t:.6g} exceeds the evaluation ceiling {ceiling:.6g}; "
            f"unverifiable at this scale"
        )


class GapTableExhausted(ConfluenceError):
    """No gap in the table leads to a valid next point from ``stranded_q``.

    ``stranded_q`` is the exact integer position (in k-units) of the last
    point reached before the walk failed, enabling resumption after the
    table or tolerance is adjusted.
    """

    def __init__(self, stranded_q: int, order: int, delta: float):
        self.stranded_q = stranded_q
        self.order = order
        self.delta = delta
        super().__init__(
            f"gap table exhausted at order {order}, delta {delta}: "
            f"stranded at q = {stranded_q}"
        )


class TableFormatError(ConfluenceError):
    """A persisted point-table file is malformed, unsorted, or corrupt."""


class LockError(ConfluenceError):
    """Another process owns the output directory's lock file."""
