"""Gap-table-driven lifting of order-n point sets to order n+1.

The successive gaps between order-n points take very few distinct values.
Recording them once (a GapTable) turns the search for order-n points into
a walk: from the current point, try each known gap until one lands on a
point again.  Every visited order-n point is then tested against one more
prime; the survivors form the order-(n+1) set.  The walk does O(gaps)
residue checks per step regardless of the magnitude of q, which is what
lets the search operate at astronomically large heights.

Membership while walking re-applies each prior prime's own construction
window (the bracketing guarantee |r| < ~0.0324 for a fast-path base, the
one-sided [0, delta) window for checked stages); emission applies a
one-sided [0, delta) window on the new prime.  A walk that steps off the
known gaps raises :class:`GapTableExhausted`, which the run driver answers
with the configured policy: abort, relax the tolerance and retry from the
stranded position, or reacquire a larger gap table.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from typing import Optional, Sequence

from ._primes import prime_sequence
from .errors import DomainError, GapTableExhausted
from .modspace import BaseSetParams, ConfluencePoint, base_set, n_max_for_q
from .precision import ExactT, residue

__all__ = [
    "DriftStats",
    "ExhaustionPolicy",
    "GapTable",
    "OrderResult",
    "RunConfig",
    "RunResult",
    "Window",
    "build_gap_table",
    "drift_stats",
    "next_order_search",
    "run",
]

# A residue acceptance window: ("one", w) means r in [0, w),
# ("sym", w) means |r| < w.
Window = tuple[str, float]


def _in_window(value: float, window: Window) -> bool:
    kind, w = window
    if kind == "one":
        return 0 <= value < w
    if kind == "sym":
        return abs(value) < w
    raise DomainError(f"unknown window kind {kind!r}")


# ---------------------------------------------------------------------------
# Gap tables
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GapTable:
    """Distinct successive gaps (in k-units) of an order-``order`` point set."""

    order: int
    gaps: tuple[int, ...]
    counts: tuple[int, ...]
    source_delta: float

    def __post_init__(self) -> None:
        if not self.gaps:
            raise DomainError("gap table must contain at least one gap")
        if list(self.gaps) != sorted(set(self.gaps)):
            raise DomainError("gaps must be distinct and ascending")
        if any(g <= 0 or g % 2 for g in self.gaps):
            raise DomainError("gaps must be positive and even")
        if len(self.counts) != len(self.gaps) or any(c < 1 for c in self.counts):
            raise DomainError("counts must align with gaps and be >= 1")

    def count_of(self, gap: int) -> int:
        return self.counts[self.gaps.index(gap)]


def build_gap_table(points: Sequence[ConfluencePoint]) -> GapTable:
    """Distinct successive q-differences of a sorted same-order point list."""
    if len(points) < 2:
        raise DomainError("need at least 2 points to build a gap table")
    order = points[0].order
    delta = points[0].delta
    if any(p.order != order for p in points):
        raise DomainError("all points must have the same order")
    qs = [p.q for p in points]
    if any(b <= a for a, b in zip(qs, qs[1:])):
        raise DomainError("points must be sorted strictly ascending")
    hist = Counter(b - a for a, b in zip(qs, qs[1:]))
    gaps = tuple(sorted(hist))
    return GapTable(order, gaps, tuple(hist[g] for g in gaps), delta)


# ---------------------------------------------------------------------------
# The lifting walk
# ---------------------------------------------------------------------------


def _point_from_walk(
    q: int,
    base_pair: tuple[int, int],
    new_order: int,
    delta: float,
    member_windows: Sequence[Window],
) -> ConfluencePoint:
    """Assemble the emitted point with authoritative residues for all its
    primes and the per-prime windows it was accepted under."""
    t = ExactT(q, base_pair)
    primes = prime_sequence(base_pair, new_order)
    residues = tuple(residue(t, p) for p in primes)
    # base pair shares its window; lifted primes carry their stage windows
    windows = (
        member_windows[0],
        member_windows[0],
        *member_windows[1:],
        ("one", delta),
    )
    return ConfluencePoint(new_order, t, delta, residues, windows)


def _walk(
    start_point: ExactT,
    gap_table: GapTable,
    check_primes: Sequence[int],
    next_prime: int,
    delta: float,
    max_points: int,
    member_windows: Sequence[Window],
    stop_q: Optional[int],
    include_start: bool,
    verify_start: bool,
) -> tuple[list[ConfluencePoint], ExactT, int]:
    base_pair = start_point.base_pair
    new_order = gap_table.order + 1

    def is_member(q: int) -> bool:
        t = ExactT(q, base_pair)
        return all(
            _in_window(float(residue(t, p).value), w)
            for p, w in zip(check_primes, member_windows)
        )

    def emits(q: int) -> Optional[ConfluencePoint]:
        if _in_window(
            float(residue(ExactT(q, base_pair), next_prime).value), ("one", delta)
        ):
            return _point_from_walk(q, base_pair, new_order, delta, member_windows)
        return None

    cur = start_point.q
    if verify_start and not is_member(cur):
        raise DomainError(
            f"start point q={cur} is not an order-{gap_table.order} point "
            f"under the membership windows"
        )
    points: list[ConfluencePoint] = []
    if include_start:
        pt = emits(cur)
        if pt is not None:
            points.append(pt)

    steps = 0
    while steps < max_points:
        advanced = False
        bounded = False
        for gap in gap_table.gaps:
            cand = cur + gap
            if stop_q is not None and cand > stop_q:
                bounded = True
                break  # gaps ascend: everything further also overshoots
            if is_member(cand):
                cur = cand
                steps += 1
                advanced = True
                pt = emits(cand)
                if pt is not None:
                    points.append(pt)
                break
        if bounded and not advanced:
            break
        if not advanced:
            raise GapTableExhausted(cur, gap_table.order, delta)
    return points, ExactT(cur, base_pair), steps


def next_order_search(
    start_point: ExactT,
    gap_table: GapTable,
    check_primes: Sequence[int],
    next_prime: int,
    delta: float,
    max_points: int,
    *,
    member_windows: Optional[Sequence[Window]] = None,
    stop_q: Optional[int] = None,
    include_start: bool = True,
    verify_start: bool = True,
) -> tuple[list[ConfluencePoint], ExactT]:
    """Walk the order-n lattice by known gaps, emitting order-(n+1) points.

    ``check_primes`` are the membership primes (the base pair's first
    prime, then each previously lifted prime); ``member_windows`` gives
    each one's acceptance window, defaulting to one-sided at the gap
    table's source delta.  Emission requires residue(next_prime) in
    [0, delta).  Walks at most ``max_points`` order-n steps (or up to
    ``stop_q``); returns the emitted points and the last visited position
    for resumption.  Raises :class:`GapTableExhausted` when no gap in the
    table leads to an order-n point from the current position.
    """
    if gap_table.source_delta > delta + 1e-15:
        raise DomainError(
            f"search delta {delta} is tighter than the gap table's source "
            f"delta {gap_table.source_delta}; the table cannot be trusted"
        )
    if max_points < 0:
        raise DomainError("max_points must be >= 0")
    if not check_primes:
        raise DomainError("at least one membership prime is required")
    if member_windows is None:
        member_windows = [("one", gap_table.source_delta)] * len(check_primes)
    if len(member_windows) != len(check_primes):
        raise DomainError("member_windows must align with check_primes")
    points, last, _ = _walk(
        start_point, gap_table, check_primes, next_prime, delta, max_points,
        member_windows, stop_q, include_start, verify_start,
    )
    return points, last


# ---------------------------------------------------------------------------
# Run configuration and the staged driver
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ExhaustionPolicy:
    """What to do when the walk runs off the known gaps.

    kind="abort": re-raise.  kind="relax": widen every window to one-sided
    [0, delta+step) and retry from the stranded position, at most
    ``retries`` times.  kind="reacquire": rebuild the gap table from a
    source acquisition ``factor`` times larger, then retry once.
    """

    kind: str = "relax"
    step: float = 0.01
    retries: int = 1
    factor: float = 2.0

    def __post_init__(self) -> None:
        if self.kind not in ("abort", "relax", "reacquire"):
            raise DomainError(f"unknown exhaustion policy {self.kind!r}")
        if self.step <= 0 or self.retries < 0 or self.factor <= 1:
            raise DomainError("invalid exhaustion policy parameters")


@dataclass(frozen=True)
class RunConfig:
    """Configuration of a staged search run.

    ``delta_schedule`` maps order -> tolerance (order 2 = the base set);
    ``budgets`` maps each lifted order -> the maximum number of source
    lattice steps its walk may take.  ``base_mode`` selects the order-2
    generator mode; ``base_n_max`` bounds the crossing enumeration (derived
    from ``base_points_target`` when None).
    """

    base_pair: tuple[int, int] = (2, 3)
    delta_schedule: dict[int, float] = field(default_factory=dict)
    budgets: dict[int, int] = field(default_factory=dict)
    max_order: int = 3
    gap_acquisition: int = 1500
    policy: ExhaustionPolicy = field(default_factory=ExhaustionPolicy)
    base_mode: str = "run"
    base_n_max: Optional[int] = None
    base_points_target: int = 2000
    stop_q: Optional[int] = None

    def __post_init__(self) -> None:
        if self.max_order < 2:
            raise DomainError("max_order must be >= 2")
        for order in range(2, self.max_order + 1):
            if order not in self.delta_schedule:
                raise DomainError(f"delta_schedule is missing order {order}")
            d = self.delta_schedule[order]
            if not 0 < d < math.pi / 2:
                raise DomainError(f"delta for order {order} must be in (0, pi/2)")
        for order in range(3, self.max_order + 1):
            if self.budgets.get(order, 0) < 1:
                raise DomainError(f"budgets must cover order {order}")
        if self.gap_acquisition < 2:
            raise DomainError("gap_acquisition must be >= 2")


@dataclass(frozen=True)
class OrderResult:
    """One order's acquired points plus the walk state needed to resume it."""

    order: int
    points: tuple[ConfluencePoint, ...]
    delta_used: float
    member_windows: tuple[Window, ...]  # windows future walks must re-apply
    last_visited: Optional[ExactT] = None
    steps_done: int = 0

    @property
    def first(self) -> ExactT:
        return self.points[0].t

    @property
    def last(self) -> ExactT:
        return self.points[-1].t

    @property
    def mean_gap(self) -> float:
        if len(self.points) < 2:
            return 0.0
        return (self.points[-1].q - self.points[0].q) / (len(self.points) - 1)


@dataclass
class RunResult:
    per_order: dict[int, OrderResult] = field(default_factory=dict)
    log: list[str] = field(default_factory=list)

    def order_points(self, order: int) -> list[ConfluencePoint]:
        return list(self.per_order[order].points)


def _acquire_base(config: RunConfig) -> tuple[list[ConfluencePoint], tuple[Window, ...]]:
    delta = config.delta_schedule[2]
    pair = tuple(config.base_pair)
    n_max = config.base_n_max
    if pair != (2, 3):
        q_max = config.stop_q or n_max
        if q_max is None:
            raise DomainError(
                "stop_q or base_n_max (as q_max) is required for this base pair"
            )
        params = BaseSetParams(
            base_pair=pair, delta=delta, n_max=1, mode="exact", q_max=q_max
        )
    else:
        if n_max is None:
            if config.stop_q is not None:
                n_max = n_max_for_q(config.stop_q)
            else:
                # crossings yield ~2 (fast path) or ~delta/0.032 points each
                per_zero = max(2.0, delta / 0.032)
                n_max = int(config.base_points_target / per_zero) + 8
        params = BaseSetParams(
            base_pair=pair, delta=delta, n_max=n_max, mode=config.base_mode,
            q_max=config.stop_q,
        )
    points = base_set(params)
    if not points:
        raise DomainError(f"base acquisition produced no points at delta={delta}")
    windows = points[0].effective_windows()
    return points, (windows[0],)


def run(
    config: RunConfig,
    prior: Optional[RunResult] = None,
    on_order=None,
) -> RunResult:
    """Chain base acquisition, gap-table building and lifting walks.

    Deterministic given the configuration.  ``prior`` (a RunResult from an
    interrupted run) is extended in place of recomputation: complete
    earlier orders are reused and the highest recorded order resumes from
    its saved cursor, so a split run equals an uninterrupted one.
    ``on_order`` (if given) is called with each OrderResult as it
    completes, for incremental persistence.
    """
    result = RunResult()
    if prior is not None:
        result.per_order.update(prior.per_order)
        result.log.extend(prior.log)

    if 2 not in result.per_order:
        base_points, base_windows = _acquire_base(config)
        result.per_order[2] = OrderResult(
            2, tuple(base_points), config.delta_schedule[2], base_windows
        )
        result.log.append(
            f"order 2: {len(base_points)} points, delta {config.delta_schedule[2]}, "
            f"mode {config.base_mode}"
        )
    # persist (or re-persist, when reused from a prior run) the base order
    if on_order is not None:
        on_order(result.per_order[2])

    pair = tuple(config.base_pair)
    primes = prime_sequence(pair, config.max_order + 1)

    for order in range(3, config.max_order + 1):
        source = result.per_order[order - 1]
        if len(source.points) < 2:
            result.log.append(
                f"order {order}: source has {len(source.points)} point(s); stopping"
            )
            break
        delta = config.delta_schedule[order]
        budget = config.budgets[order]
        check_primes = [pair[0], *primes[2 : order - 1]]
        member_windows = list(source.member_windows)
        next_prime = primes[order - 1]

        existing = result.per_order.get(order)
        if existing is not None and existing.last_visited is not None:
            points = list(existing.points)
            start = existing.last_visited
            steps_left = budget - existing.steps_done
            include_start = False
            verify_start = False
            delta = existing.delta_used
            member_windows = list(existing.member_windows[:-1])
        else:
            points = []
            start = source.points[0].t
            steps_left = budget
            include_start = True
            verify_start = True

        table = build_gap_table(list(source.points[: config.gap_acquisition]))
        policy = config.policy
        relaxes = 0
        reacquired = False
        steps_done = existing.steps_done if existing is not None else 0
        while True:
            try:
                new_points, last, steps = _walk(
                    start, table, check_primes, next_prime, delta,
                    max(steps_left, 0), member_windows, config.stop_q,
                    include_start, verify_start,
                )
                points.extend(new_points)
                steps_done += steps
                break
            except GapTableExhausted as exc:
                if policy.kind == "relax" and relaxes < policy.retries:
                    relaxes += 1
                    delta = delta + policy.step
                    member_windows = [("one", delta)] * len(check_primes)
                    result.log.append(
                        f"order {order}: exhausted at q={exc.stranded_q}; "
                        f"relaxed all windows to [0, {delta:.4g})"
                    )
                    start = ExactT(exc.stranded_q, pair)
                    include_start = False
                    verify_start = False
                    continue
                if policy.kind == "reacquire" and not reacquired:
                    reacquired = True
                    bigger = int(config.gap_acquisition * policy.factor)
                    table = build_gap_table(list(source.points[:bigger]))
                    result.log.append(
                        f"order {order}: exhausted at q={exc.stranded_q}; "
                        f"reacquired gap table from {bigger} source points"
                    )
                    start = ExactT(exc.stranded_q, pair)
                    include_start = False
                    verify_start = False
                    continue
                result.log.append(
                    f"order {order}: exhausted at q={exc.stranded_q}; aborting"
                )
                raise

        # windows the next stage must re-apply: membership + this emission
        stage_windows = (*member_windows, ("one", delta))
        result.per_order[order] = OrderResult(
            order, tuple(points), delta, stage_windows, last, steps_done,
        )
        result.log.append(
            f"order {order}: {len(points)} points, delta {delta}"
        )
        if on_order is not None:
            on_order(result.per_order[order])
        if not points:
            result.log.append(f"order {order}: empty; stopping")
            break
    return result


# ---------------------------------------------------------------------------
# Drift statistics
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class DriftStats:
    point_count: int
    first_gap_fraction: float
    gap_histogram: dict[int, int]
    max_residue: float
    mean_residue: float
    min_residue: float


def drift_stats(points: Sequence[ConfluencePoint], gap_table: GapTable) -> DriftStats:
    """How stable the walk is: how often the first (smallest) gap hits, the
    observed gap histogram, and the spread of the stored residues."""
    if not points:
        raise DomainError("drift_stats requires at least one point")
    qs = [p.q for p in points]
    diffs = [b - a for a, b in zip(qs, qs[1:])]
    hist = dict(Counter(diffs))
    first_gap = gap_table.gaps[0]
    frac = (sum(1 for d in diffs if d == first_gap) / len(diffs)) if diffs else 1.0
    values = [float(r.value) for p in points for r in p.residues]
    return DriftStats(
        point_count=len(points),
        first_gap_fraction=frac,
        gap_histogram=hist,
        max_residue=max(values),
        mean_residue=sum(values) / len(values),
        min_residue=min(values),
    )
