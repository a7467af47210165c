"""Geometry of the phase lattice for a base prime pair.

For the base pair (2,3) and k = pi/(log3 - log2), every even lattice index
q has identical residues for 2 and 3, so order-2 points live on the even-q
lattice.  Within one residue class mod 62 the residue advances by an exact
constant ~0.0324 per 62-unit step, and crosses zero near the zeros of a
slowly sloped family of lines (the R family below).  Those crossings are
equally spaced, which turns order-2 point generation into O(1) arithmetic
per crossing instead of a scan of the whole lattice.

Two generators are provided:

* ``base_set`` — the crossing-driven generator, with an ``exact`` mode
  (provably equivalent to the brute oracle) and a ``run`` mode replicating
  the historically published enumeration (fast path, later start);
* ``brute_force_base`` — the ground-truth oracle: it tests every even
  lattice index with a compensated float64 prefilter and confirms every
  candidate decision in arbitrary precision.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import mpmath
import numpy as np
from mpmath import mp

from . import _ddmath
from ._primes import prime_sequence
from .errors import DomainError, PrecisionError
from .precision import (
    MIN_DIGITS,
    BigReal,
    ExactT,
    _k_log_raw,
    _k_unit_raw,
    pi_value,
    residue,
    wrap_residue,
)

__all__ = [
    "BaseSetParams",
    "ConfluencePoint",
    "LATTICE_STRIDE",
    "LineFamily",
    "base_set",
    "brute_force_base",
    "fast_path_threshold",
    "lattice_step_residue",
    "line_family",
    "n_max_for_q",
    "nearest_neighbors",
    "portrait",
    "r_line_zero",
    "zero_index_near",
    "zero_spacing",
]

# Lattice stride between consecutive candidates within one residue class.
LATTICE_STRIDE = 62

_PAIR = (2, 3)
_WINDOW_SLACK = 1e-9  # float tolerance when re-validating stored residues


def _require_pair_23(base_pair: tuple[int, int], what: str) -> None:
    if tuple(base_pair) != _PAIR:
        raise DomainError(
            f"{what} uses the closed-form line family, implemented only for "
            f"base pair {_PAIR}; got {tuple(base_pair)}"
        )


# ---------------------------------------------------------------------------
# Line families
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LineFamily:
    """One family of lines ``y = slope * t + intercept(indices)`` in the
    phase plane of the base pair (2,3)."""

    kind: str
    slope: BigReal
    intercept_of: Callable[..., BigReal]


def _pair_log_consts(dps: int) -> tuple[mpmath.mpf, mpmath.mpf]:
    with mp.workdps(dps):
        return mp.ln(2), mp.ln(3)


def line_family(kind: str, digits: int = MIN_DIGITS) -> LineFamily:
    """The L, G or R line family for base pair (2,3).

    L: slope 3log2 - 2log3, intercept(n) = 2n*pi - pi/2
    G: slope (8log2 - 5log3)/3, intercept(n) = -2n*pi/3 + 3*pi/2
    R: slope (84log2 - 53log3)/31, intercept(n,m) = (pi/62)(16n + 4m - 31)

    The R indexing is chosen so that ``zero = -intercept/slope`` agrees with
    :func:`r_line_zero`; both are validated against the brute oracle.
    """
    digits = max(digits, MIN_DIGITS)
    dps = digits + 10
    log2, log3 = _pair_log_consts(dps)
    pi = pi_value(dps)

    # All arithmetic below runs at dps: the R slope in particular loses ~4
    # leading digits to cancellation and must not inherit ambient precision.
    if kind == "L":
        with mp.workdps(dps):
            slope = BigReal(3 * log2 - 2 * log3, digits)

        def intercept_of(n: int) -> BigReal:
            with mp.workdps(dps):
                return BigReal(2 * n * pi - pi / 2, digits)

    elif kind == "G":
        with mp.workdps(dps):
            slope = BigReal((8 * log2 - 5 * log3) / 3, digits)

        def intercept_of(n: int) -> BigReal:
            with mp.workdps(dps):
                return BigReal(-2 * n * pi / 3 + 3 * pi / 2, digits)

    elif kind == "R":
        with mp.workdps(dps):
            slope = BigReal((84 * log2 - 53 * log3) / 31, digits)

        def intercept_of(n: int, m: int) -> BigReal:
            _check_rm(n, m)
            with mp.workdps(dps):
                return BigReal(pi / 62 * (16 * n + 4 * m - 31), digits)

    else:
        raise DomainError(f"unknown line family {kind!r}; expected L, G or R")
    return LineFamily(kind, slope, intercept_of)


def _check_rm(n: int, m: int) -> None:
    if m not in (1, 2, 3, 4):
        raise DomainError(f"m must be in 1..4, got {m}")
    if n < 0:
        raise DomainError(f"n must be >= 0, got {n}")


def _zero_denominator(dps: int) -> mpmath.mpf:
    """53 log 3 - 84 log 2 (positive)."""
    log2, log3 = _pair_log_consts(dps)
    return 53 * log3 - 84 * log2


def r_line_zero(n: int, m: int, digits: int = MIN_DIGITS) -> BigReal:
    """t-axis crossing of line R(n, m): v*pi / (2*(53log3 - 84log2)) with
    v = 16n + 4m - 31.  Crossings at consecutive v (lexicographic in (n,m))
    are equally spaced by ``zero_spacing()``."""
    _check_rm(n, m)
    v = 16 * n + 4 * m - 31
    digits = max(digits, MIN_DIGITS) + len(str(abs(v)))
    with mp.workdps(digits + 10):
        return BigReal(v * pi_value(digits + 10) / (2 * _zero_denominator(digits + 10)), digits)


def zero_spacing(digits: int = MIN_DIGITS) -> BigReal:
    """Spacing between consecutive R-line crossings, 2*pi/(53log3 - 84log2)
    in t units (~3009)."""
    digits = max(digits, MIN_DIGITS)
    with mp.workdps(digits + 10):
        return BigReal(2 * pi_value(digits + 10) / _zero_denominator(digits + 10), digits)


def _v_to_nm(v: int) -> tuple[int, int]:
    if v % 4 != 1:
        raise DomainError(f"crossing index v must be 1 mod 4, got {v}")
    u = (v + 31) // 4
    m = ((u - 1) % 4) + 1
    n = (u - m) // 4
    return n, m


def _anchor(v: int) -> int:
    """Start of the 62-stride residue class whose crossing has index v."""
    n, m = _v_to_nm(v)
    return 62 - 14 * m + 6 * n


def _zero_q_per_v(dps: int) -> mpmath.mpf:
    """Crossing position in q units per unit of v: (log3-log2)/(2*(53log3-84log2))."""
    log2, log3 = _pair_log_consts(dps)
    return (log3 - log2) / (2 * _zero_denominator(dps))


def zero_index_near(q: int) -> tuple[int, int]:
    """(n, m) of the R-line crossing nearest to lattice position q.

    Pure integer/big-float arithmetic: O(1) at any magnitude of q, the key
    to locating order-2 points near astronomically large q.
    """
    if q < 1:
        raise DomainError(f"q must be >= 1, got {q}")
    dps = len(str(q)) + 25
    with mp.workdps(dps):
        v_real = mpmath.mpf(q) / _zero_q_per_v(dps)
        v0 = int(mpmath.floor((v_real - 1) / 4)) * 4 + 1
        best = min(
            (v for v in (v0, v0 + 4) if v >= 1),
            key=lambda v: abs(v_real - v),
            default=1,
        )
    return _v_to_nm(max(best, 1))


def nearest_neighbors(zero: BigReal, base_pair: tuple[int, int] = _PAIR) -> tuple[ExactT, ExactT]:
    """The two consecutive lattice points (stride 62) bracketing a crossing.

    ``zero`` must be (numerically) a member of the R-crossing family; the
    crossing index is reconstructed from the value, the residue class is
    derived from it, and the bracketing pair is found by exact integer
    arithmetic, so this works unchanged at arbitrary magnitude.
    Returns (prev, next) with to_real(prev) <= zero < to_real(next).
    """
    _require_pair_23(base_pair, "nearest_neighbors")
    if not zero.value > 0:
        raise DomainError("crossing must be positive")

    dps = max(zero.precision_digits + 10, mp.dps, 40)
    for attempt in range(4):
        with mp.workdps(dps):
            z_q = zero.value / _k_unit_raw(base_pair, dps)
            per_v = _zero_q_per_v(dps)
            v0 = int(mpmath.floor((z_q / per_v - 1) / 4)) * 4 + 1
            v = min(
                (vv for vv in (v0, v0 + 4) if vv >= 1),
                key=lambda vv: abs(z_q - vv * per_v),
                default=1,
            )
            rel = abs(z_q - v * per_v) / (4 * per_v)
            if rel > 0.26:
                raise DomainError(
                    f"{zero} is not an R-line crossing (off-grid by {float(rel):.3f} spacings)"
                )
            a = _anchor(v)
            x = (z_q - a) / LATTICE_STRIDE
            j = int(mpmath.floor(x))
            eps = (abs(x) + 1) * mpmath.mpf(10) ** (10 - dps)
            on_boundary = (x - j) < eps or (x - j) > 1 - eps
        if not on_boundary:
            break
        if attempt == 3:
            raise PrecisionError(
                f"crossing {zero} sits too close to a lattice point to bracket"
            )
        dps += 20  # re-derive with more digits
    prev_q = a + LATTICE_STRIDE * j
    if prev_q < 0:
        raise DomainError(f"crossing {zero} precedes the positive lattice")
    return (
        ExactT(prev_q, base_pair),
        ExactT(prev_q + LATTICE_STRIDE, base_pair),
    )


# ---------------------------------------------------------------------------
# Residue step along a class, and the fast-path threshold
# ---------------------------------------------------------------------------


def lattice_step_residue(base_pair: tuple[int, int] = _PAIR, digits: int = MIN_DIGITS) -> BigReal:
    """Exact residue increment per +62 lattice units within one class
    (about -0.032358 for (2,3); identical for both base primes)."""
    _require_pair_23(base_pair, "lattice_step_residue")
    digits = max(digits, MIN_DIGITS)
    with mp.workdps(digits + 15):
        step = wrap_residue(LATTICE_STRIDE * _k_log_raw(base_pair, 2, digits + 15))
        if step >= mp.pi / 2:
            step -= 2 * pi_value(digits + 15)
        return BigReal(step, digits)


def fast_path_threshold(base_pair: tuple[int, int] = _PAIR) -> float:
    """Residue magnitude guaranteed for both bracketing neighbors of a
    crossing: |per-step residue increment| (~0.0324 for (2,3)).  Tolerances
    above it accept the neighbors without individual residue checks."""
    return abs(float(lattice_step_residue(base_pair).value))


# ---------------------------------------------------------------------------
# Confluence points and base-set parameters
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConfluencePoint:
    """A lattice point whose first ``order`` prime residues all fall in
    their acceptance windows.

    ``windows`` records, per prime, the window the point was accepted
    under: ("one", w) means residue in [0, w); ("sym", w) means |residue|
    < w (the construction guarantee of the crossing fast path).  ``None``
    means one-sided at ``delta`` for every prime.
    """

    order: int
    t: ExactT
    delta: float
    residues: tuple[BigReal, ...]
    windows: Optional[tuple[tuple[str, float], ...]] = None

    def __post_init__(self) -> None:
        if self.order < 2:
            raise DomainError(f"order must be >= 2, got {self.order}")
        if len(self.residues) != self.order:
            raise DomainError(
                f"expected {self.order} residues, got {len(self.residues)}"
            )
        if self.windows is not None and len(self.windows) != self.order:
            raise DomainError("windows must align with residues")

    @property
    def q(self) -> int:
        return self.t.q

    @property
    def symmetric(self) -> bool:
        return any(kind == "sym" for kind, _ in self.effective_windows())

    def effective_windows(self) -> tuple[tuple[str, float], ...]:
        if self.windows is not None:
            return self.windows
        return (("one", self.delta),) * self.order

    def primes(self) -> tuple[int, ...]:
        return tuple(prime_sequence(self.t.base_pair, self.order))

    def validate(self) -> None:
        """Re-check every stored residue against its recorded window."""
        for r, (kind, w) in zip(self.residues, self.effective_windows()):
            x = float(r.value)
            ok = (-_WINDOW_SLACK <= x < w + _WINDOW_SLACK) if kind == "one" else (
                abs(x) < w + _WINDOW_SLACK
            )
            if not ok:
                raise DomainError(
                    f"residue {x} escapes its {kind} window of width {w} at q={self.q}"
                )


@dataclass(frozen=True)
class BaseSetParams:
    """Parameters for order-2 set generation.

    ``mode="exact"`` checks every candidate and is provably equivalent to
    the brute oracle; ``mode="run"`` replicates the published enumeration:
    crossings are visited starting from the second positive one, and above
    ``fast_path_threshold`` both neighbors are accepted without checks.
    """

    base_pair: tuple[int, int] = _PAIR
    delta: float = 0.01
    n_max: int = 100
    fast_path_threshold: Optional[float] = None
    mode: str = "exact"
    q_max: Optional[int] = None

    def __post_init__(self) -> None:
        if not 0 < self.delta < math.pi / 2:
            raise DomainError(f"delta must be in (0, pi/2), got {self.delta}")
        if self.n_max < 1:
            raise DomainError(f"n_max must be >= 1, got {self.n_max}")
        if self.mode not in ("exact", "run"):
            raise DomainError(f"mode must be 'exact' or 'run', got {self.mode!r}")
        if self.q_max is not None and self.q_max < 2:
            raise DomainError(f"q_max must be >= 2, got {self.q_max}")

    def threshold(self) -> float:
        if self.fast_path_threshold is not None:
            return self.fast_path_threshold
        return fast_path_threshold(self.base_pair)


def n_max_for_q(q_max: int) -> int:
    """Smallest n_max whose crossings cover the lattice up to q_max (pair (2,3))."""
    with mp.workdps(len(str(q_max)) + 25):
        v_needed = int(mpmath.ceil(mpmath.mpf(q_max) / _zero_q_per_v(mp.dps)))
    return max(1, (v_needed + 15) // 16 + 2)


def _confirmed_point(
    q: int,
    base_pair: tuple[int, int],
    delta: float,
    windows: tuple[tuple[str, float], ...],
    enforce: bool,
) -> Optional[ConfluencePoint]:
    """Build a point with authoritative residues; None if ``enforce`` and
    the first prime's residue escapes its window."""
    t = ExactT(q, base_pair)
    p1, p2 = base_pair
    r1 = residue(t, p1)
    if enforce:
        kind, w = windows[0]
        x = float(r1.value)
        inside = (0 <= x < w) if kind == "one" else (abs(x) < w)
        if not inside:
            return None
    r2 = residue(t, p2)
    return ConfluencePoint(2, t, delta, (r1, r2), windows)


def _scan_lattice_points(
    q_lo: int,
    q_hi: int,
    delta: float,
    base_pair: tuple[int, int],
    windows: tuple[tuple[str, float], ...],
) -> list[ConfluencePoint]:
    """Every even q in [q_lo, q_hi] with residue(p1) in [0, delta).

    Compensated float64 prefilter over the full lattice; every candidate
    within the window (plus a safety margin) is confirmed in arbitrary
    precision, so prefilter error cannot change the result.
    """
    if q_hi >= _ddmath.EXACT_Q_LIMIT:
        raise DomainError("lattice scan supports q below 2**53 only")
    c1 = _ddmath.cycles_per_step(base_pair, base_pair[0])
    margin = _ddmath.SAFE_MARGIN_CYCLES
    # [0, delta) in residue space maps to [0, min(delta, pi)/2pi) in quarter
    # distance, plus a wrapped interval below zero once delta exceeds pi
    # (the residue range extends to 3*pi/2); delta >= 3*pi/2 accepts all.
    accept_all = delta >= 3 * math.pi / 2
    hi_cycles = min(delta, math.pi) / (2 * math.pi)
    wrap_hi = delta / (2 * math.pi) - 1.0  # right edge of the wrapped piece
    out: list[ConfluencePoint] = []
    chunk = 4_000_000
    start = q_lo + (q_lo % 2)  # first even >= q_lo
    for base in range(start, q_hi + 1, 2 * chunk):
        qs = np.arange(base, min(base + 2 * chunk, q_hi + 1), 2, dtype=np.float64)
        if accept_all:
            cand = qs
        else:
            qd = _ddmath.quarter_distance(qs, c1)
            mask = (qd > -margin) & (qd < hi_cycles + margin)
            if delta > math.pi:
                mask |= qd < wrap_hi + margin
            cand = qs[mask]
        for qf in cand:
            pt = _confirmed_point(
                int(qf), base_pair, delta, windows, enforce=not accept_all
            )
            if pt is not None:
                out.append(pt)
    return out


def base_set(params: BaseSetParams) -> list[ConfluencePoint]:
    """All order-2 points reachable from the R-line crossings.

    Exact mode: around every crossing, every lattice candidate within
    ceil(delta/step)+2 strides of the bracketing pair is residue-checked
    one-sidedly in [0, delta) — equivalent to the brute oracle because the
    per-stride residue increment within a class is an exact constant.

    Run mode: crossings are enumerated from the second positive one, and
    when delta exceeds the fast-path threshold the two bracketing
    neighbors are accepted without checks (their residues are bounded by
    the threshold by construction).

    For base pairs without the closed-form crossing family, the generator
    falls back to the prefiltered lattice scan (requires ``q_max``).
    """
    pair = tuple(params.base_pair)
    delta = params.delta
    one_windows = (("one", delta),) * 2

    if pair != _PAIR:
        if params.q_max is None:
            raise DomainError(
                f"base pair {pair} has no closed-form crossing family; q_max required"
            )
        return _scan_lattice_points(2, params.q_max, delta, pair, one_windows)

    thresh = params.threshold()
    fast = params.mode == "run" and delta > thresh
    sym_windows = (("sym", thresh),) * 2

    v_start = 5 if params.mode == "run" else 1
    v_max = 16 * params.n_max - 15
    spread = int(math.ceil(delta / thresh)) + 2

    # gather candidate q values
    seen: set[int] = set()
    candidates: list[int] = []
    dps = len(str(v_max)) + 25
    with mp.workdps(dps):
        per_v = _zero_q_per_v(dps)
        for v in range(v_start, v_max + 1, 4):
            a = _anchor(v)
            j = int(mpmath.floor((v * per_v - a) / LATTICE_STRIDE))
            if fast:
                span = (j, j + 1)
            else:
                span = range(j - spread, j + spread + 2)
            for jj in span:
                q = a + LATTICE_STRIDE * jj
                if q >= 2 and q not in seen:
                    seen.add(q)
                    candidates.append(q)
    candidates.sort()
    if params.q_max is not None:
        candidates = [q for q in candidates if q <= params.q_max]

    if fast:
        points = [
            _confirmed_point(q, pair, delta, sym_windows, enforce=False)
            for q in candidates
        ]
        return [p for p in points if p is not None]

    # prefilter the checked candidates, then confirm each survivor
    margin = _ddmath.SAFE_MARGIN_CYCLES
    hi_cycles = delta / (2 * math.pi)
    c1 = _ddmath.cycles_per_step(pair, pair[0])
    qs = np.array(candidates, dtype=np.float64)
    if qs.size and candidates[-1] < _ddmath.EXACT_Q_LIMIT:
        qd = _ddmath.quarter_distance(qs, c1)
        survivors = [int(q) for q, d in zip(candidates, qd) if -margin < d < hi_cycles + margin]
    else:
        survivors = candidates  # beyond prefilter range: confirm everything
    out = []
    for q in survivors:
        pt = _confirmed_point(q, pair, delta, one_windows, enforce=True)
        if pt is not None:
            out.append(pt)
    return out


def brute_force_base(
    q_max: int, delta: float, base_pair: tuple[int, int] = _PAIR
) -> list[ConfluencePoint]:
    """Ground-truth order-2 oracle: scan every even q in [2, q_max] and
    accept iff residue(q*k, p1) is in [0, delta) (p2's residue is identical
    on the even lattice; it is stored but not part of the decision)."""
    if q_max < 2:
        raise DomainError(f"q_max must be >= 2, got {q_max}")
    if not 0 < delta <= 2 * math.pi:
        raise DomainError(f"delta must be in (0, 2*pi], got {delta}")
    windows = (("one", delta),) * 2
    return _scan_lattice_points(2, q_max, delta, tuple(base_pair), windows)


# ---------------------------------------------------------------------------
# Residue portraits
# ---------------------------------------------------------------------------


def portrait(
    point: ConfluencePoint, alpha: float, samples_per_line: int
) -> list[tuple[int, float, float]]:
    """Residue samples of every prime of the point across [t-alpha, t+alpha].

    Returns rows (prime, t_offset, residue_value) suitable for plotting;
    between wraps each prime's curve is a straight line of slope log p.
    """
    if not alpha > 0:
        raise DomainError(f"alpha must be positive, got {alpha}")
    if samples_per_line < 2:
        raise DomainError(f"samples_per_line must be >= 2, got {samples_per_line}")
    primes = point.primes()
    base = {p: float(r.value) for p, r in zip(primes, point.residues)}
    rows: list[tuple[int, float, float]] = []
    lo, hi = -math.pi / 2, 3 * math.pi / 2
    for p in primes:
        logp = math.log(p)
        for i in range(samples_per_line):
            o = alpha * (2 * i - (samples_per_line - 1)) / (samples_per_line - 1)
            r = math.remainder(base[p] + o * logp, 2 * math.pi)
            if r < lo:
                r += 2 * math.pi
            elif r >= hi:
                r -= 2 * math.pi
            rows.append((p, o, r))
    return rows
