"""Locating negative-real-part samples of zeta on the sigma = 1 line.

Confluence points mark heights t where the first few prime phases align;
:func:`scan_window` probes a +/-1 neighbourhood of such a point on a fixed
rational offset grid and reports any sample with Re zeta(1+it) < 0.  The
complementary :func:`brute_scan` walks an interval of the line at a fixed
step with no structural guidance, as a baseline.

Scanning is defined on sigma = 1 only.  On sigma >= the negativity
threshold (see :mod:`confluence.titchmarsh`) the real part provably cannot
go negative, so there is nothing to scan for; 1 sits well below the
threshold.  Every reported hit is re-validated at 10 extra digits and only
kept when the re-evaluation certifies the sign (|Re| exceeds its error
bound), so hits are never an artifact of evaluation noise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional

import numpy as np

from .errors import DomainError
from .modspace import ConfluencePoint
from .precision import ComplexValue, ExactT, to_real
from .zetaeval import DEFAULT_CEILING, EvalRequest, _em_cutoff, light_tail, zeta

__all__ = [
    "NegativeRegionHit",
    "WindowScan",
    "brute_scan",
    "scan_tables",
    "scan_window",
]

_SIGMA = 1.0  # the only line this module scans

#: pole guard: zeta(1+it) is dominated by the pole below this height
_MIN_T = 1e-3

#: largest t the float64 batch kernel may prefilter (phase error ~3e-8 rad)
_BATCH_MAX_T = 1.0e7

#: batch samples whose Re falls below this margin are re-checked exactly
_PREFILTER_MARGIN = 1e-3

Sample = tuple[Fraction, ComplexValue]


@dataclass(frozen=True)
class NegativeRegionHit:
    """A certified sample with Re zeta(1+it) < 0.

    ``t_sample`` carries the exact height (lattice index plus rational
    offset); ``zeta_value`` is the re-validated evaluation whose real part
    is negative by more than its error bound.  ``window_samples`` keeps the
    full surrounding sample window for later study of the region.
    """

    source_point: Optional[ConfluencePoint]
    t_sample: ExactT
    zeta_value: ComplexValue
    min_re_in_window: float
    window_samples: tuple[Sample, ...] = ()

    def __post_init__(self) -> None:
        if not self.zeta_value.re < 0:
            raise DomainError("a negative-region hit requires Re < 0")


@dataclass(frozen=True)
class WindowScan:
    """Outcome of scanning one confluence point's +/-1 neighbourhood.

    ``status`` is "scanned" when the window was evaluated and
    "unverifiable" when the point lies above the evaluation ceiling, in
    which case ``samples`` is empty and ``hit`` is None — the point is
    reported as out of reach rather than silently dropped.
    """

    point: ConfluencePoint
    status: str
    samples: tuple[Sample, ...]
    hit: Optional[NegativeRegionHit]

    def __post_init__(self) -> None:
        if self.status not in ("scanned", "unverifiable"):
            raise DomainError(f"unknown scan status {self.status!r}")


def _offsets(samples: int) -> list[Fraction]:
    if samples < 2:
        raise DomainError(f"samples must be >= 2, got {samples}")
    span = samples - 1
    return [Fraction(2 * i - span, span) for i in range(samples)]


def _certified_negative(value: ComplexValue) -> bool:
    return value.re + value.err_bound < 0


def scan_window(
    point: ConfluencePoint,
    samples: int = 21,
    *,
    digits: int = 10,
    ceiling: float = DEFAULT_CEILING,
) -> WindowScan:
    """Evaluate zeta(1 + i(t+o)) at ``samples`` offsets o = -1 ... +1.

    The offsets are exact rationals with spacing 2/(samples-1) (for the
    default 21, all multiples of 1/10), symmetric about 0 and including
    both endpoints.  If any sample has a negative real part, the hit
    records the most negative one after certification at +10 digits; the
    samples themselves are always returned.  A point above ``ceiling``
    yields an "unverifiable" scan instead of an error.
    """
    t_real = float(to_real(point.t, point.t.q_digits + 25).value)
    if t_real > ceiling:
        return WindowScan(point, "unverifiable", (), None)

    window: list[Sample] = []
    for offset in _offsets(samples):
        t_sample = point.t.with_offset(offset)
        value = zeta(EvalRequest(_SIGMA, t_sample, digits, ceiling=ceiling))
        window.append((offset, value))

    min_re = min(float(value.re) for _, value in window)
    hit: Optional[NegativeRegionHit] = None
    negatives = sorted(
        (pair for pair in window if pair[1].re < 0), key=lambda pair: pair[1].re
    )
    for offset, _ in negatives:
        t_sample = point.t.with_offset(offset)
        confirmed = zeta(EvalRequest(_SIGMA, t_sample, digits + 10, ceiling=ceiling))
        if _certified_negative(confirmed):
            hit = NegativeRegionHit(
                point, t_sample, confirmed, min_re, tuple(window)
            )
            break
    return WindowScan(point, "scanned", tuple(window), hit)


def scan_tables(
    run_result,
    max_order: int,
    *,
    samples: int = 21,
    digits: int = 10,
    ceiling: float = DEFAULT_CEILING,
) -> list[NegativeRegionHit]:
    """Scan every confluence point of orders 2..max_order under the ceiling.

    Points are visited in ascending order and ascending q, so the hit list
    is deterministic.  Points above the ceiling are skipped (scan_window
    marks them unverifiable); everything else gets a full window scan.
    """
    for order in range(2, max_order + 1):
        if order not in run_result.per_order:
            raise DomainError(f"run result does not contain order {order}")
    hits: list[NegativeRegionHit] = []
    for order in range(2, max_order + 1):
        for point in run_result.per_order[order].points:
            scan = scan_window(point, samples, digits=digits, ceiling=ceiling)
            if scan.hit is not None:
                hits.append(scan.hit)
    return hits


def _batch_values(ts: np.ndarray) -> np.ndarray:
    """Approximate Re zeta(1+it) for a chunk of modest heights."""
    re, _ = _line_batch(ts)
    return re


def _line_batch(ts: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    from . import _mainsum

    return _mainsum.line_values_batch(
        ts, lambda t: _em_cutoff(float(t), 6), light_tail
    )


def brute_scan(
    t_start: float,
    t_end: float,
    step: float = 0.1,
    *,
    digits: int = 10,
    chunk: int = 32768,
    progress: Optional[Callable[[float], None]] = None,
) -> Optional[float]:
    """First t in {t_start, t_start+step, ...} <= t_end with Re zeta(1+it) < 0.

    The baseline structure-free search: chunks of the grid are evaluated
    with a fast float64 kernel, any sample whose real part falls below a
    safety margin is re-evaluated exactly in ascending order, and the
    first certified negative is returned (None when the whole range stays
    positive).  Samples below the pole guard t = 1e-3 are skipped, since
    the pole at s = 1 forces Re > 0 there.  Resume an interrupted scan by
    calling again with t_start just past the last covered height;
    ``progress`` (if given) receives the end of each covered chunk.
    """
    if not t_start < t_end:
        raise DomainError("t_start must be < t_end")
    if step <= 0:
        raise DomainError("step must be > 0")
    if chunk < 1:
        raise DomainError("chunk must be >= 1")

    def certify(t: float) -> bool:
        value = zeta(EvalRequest(_SIGMA, t, digits))
        return _certified_negative(value)

    total = int(math.floor((t_end - t_start) / step + 1e-9)) + 1
    index = 0
    while index < total:
        count = min(chunk, total - index)
        ts = t_start + step * np.arange(index, index + count, dtype=np.float64)
        ts = ts[ts >= _MIN_T]
        if ts.size:
            if ts[-1] <= _BATCH_MAX_T:
                flagged = ts[_batch_values(ts) < _PREFILTER_MARGIN]
            else:
                flagged = ts  # beyond the fast kernel: check every sample
            for t in flagged:
                if certify(float(t)):
                    return float(t)
        index += count
        if progress is not None:
            progress(float(t_start + step * (index - 1)))
    return None
