"""Exact abscissa representation and high-precision modular reduction.

The search works with abscissae of the form

    t = q * k + offset,      k = pi / (log p2 - log p1),

where ``q`` is an exact (arbitrarily large) integer and ``offset`` a small
rational used only for scan points.  Everything downstream depends on
reducing ``t * log p`` modulo 2*pi to at least 1e-12 absolute accuracy even
when ``q`` has 30 digits, which requires working precision that grows with
the size of ``q``.  This module owns that policy.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Union

import mpmath
from mpmath import mp

from ._primes import is_prime
from .errors import DomainError, PrecisionError

__all__ = [
    "BigReal",
    "ComplexValue",
    "ExactT",
    "MIN_DIGITS",
    "RESIDUE_ABS_TOL",
    "log_prime",
    "pi_value",
    "k_unit",
    "to_real",
    "residue",
    "wrap_residue",
    "working_digits",
]

#: Minimum precision (significant decimal digits) carried by any BigReal.
MIN_DIGITS = 30

#: Guaranteed absolute accuracy of :func:`residue` results.
RESIDUE_ABS_TOL = 1e-12

# Residue range ['s lower edge: results live in [-pi/2, 3*pi/2).
_QUARTER_TURN = 0.25  # of a full turn; the shift below theta = pi/2


@dataclass(frozen=True)
class BigReal:
    """An extended-precision real together with its precision in digits.

    Arithmetic between BigReals propagates the *weaker* precision of the two
    operands; mixing with plain ints/floats/Fractions keeps the BigReal's
    precision (exact operands do not degrade it).
    """

    value: mpmath.mpf
    precision_digits: int

    def __post_init__(self):
        if self.precision_digits < MIN_DIGITS:
            raise PrecisionError(
                f"BigReal requires >= {MIN_DIGITS} digits, "
                f"got {self.precision_digits}"
            )

    # -- conversions -----------------------------------------------------
    def __float__(self) -> float:
        return float(self.value)

    def __str__(self) -> str:
        with mp.workdps(self.precision_digits):
            return mp.nstr(self.value, self.precision_digits)

    def digits_str(self, digits: int) -> str:
        """Decimal string with ``digits`` significant digits."""
        with mp.workdps(max(digits, MIN_DIGITS)):
            return mp.nstr(self.value, digits, strip_zeros=False)

    # -- arithmetic ------------------------------------------------------
    def _binop(self, other, op) -> "BigReal":
        if isinstance(other, BigReal):
            digits = min(self.precision_digits, other.precision_digits)
            raw = other.value
        elif isinstance(other, (int, float, Fraction, mpmath.mpf)):
            digits = self.precision_digits
            raw = other
        else:
            return NotImplemented
        with mp.workdps(digits + 10):
            if isinstance(raw, Fraction):
                raw = mpmath.mpf(raw.numerator) / raw.denominator
            else:
                raw = mpmath.mpf(raw)
            return BigReal(op(self.value, raw), digits)

    def __add__(self, other):
        return self._binop(other, lambda a, b: a + b)

    __radd__ = __add__

    def __sub__(self, other):
        return self._binop(other, lambda a, b: a - b)

    def __rsub__(self, other):
        return self._binop(other, lambda a, b: b - a)

    def __mul__(self, other):
        return self._binop(other, lambda a, b: a * b)

    __rmul__ = __mul__

    def __truediv__(self, other):
        return self._binop(other, lambda a, b: a / b)

    def __rtruediv__(self, other):
        return self._binop(other, lambda a, b: b / a)

    def __neg__(self):
        return BigReal(-self.value, self.precision_digits)

    def __abs__(self):
        return BigReal(abs(self.value), self.precision_digits)

    # -- comparisons (against anything mpmath can compare) ---------------
    def _cmp_value(self, other):
        return other.value if isinstance(other, BigReal) else other

    def __lt__(self, other):
        return self.value < self._cmp_value(other)

    def __le__(self, other):
        return self.value <= self._cmp_value(other)

    def __gt__(self, other):
        return self.value > self._cmp_value(other)

    def __ge__(self, other):
        return self.value >= self._cmp_value(other)

    def __eq__(self, other):
        if isinstance(other, (BigReal, int, float, mpmath.mpf)):
            return self.value == self._cmp_value(other)
        return NotImplemented

    def __hash__(self):
        return hash(self.value)


@dataclass(frozen=True)
class ComplexValue:
    """Arbitrary-precision complex value with an attached error bound.

    ``err_bound`` is an upper bound on the distance from the stored value
    to the mathematically exact one.  ``method`` records which evaluation
    engine produced the value (useful for audit; empty when irrelevant).
    """

    re: BigReal
    im: BigReal
    err_bound: float
    method: str = ""

    def __post_init__(self):
        if self.err_bound < 0:
            raise DomainError("err_bound must be nonnegative")

    def __complex__(self) -> complex:
        return complex(float(self.re), float(self.im))

    def __str__(self) -> str:
        sign = "+" if float(self.im) >= 0 else "-"
        return f"{float(self.re):.10g} {sign} {abs(float(self.im)):.10g}i"

    @classmethod
    def from_mpc(cls, value, err_bound: float, digits: int, method: str = "") -> "ComplexValue":
        digits = max(digits, MIN_DIGITS)
        return cls(
            re=BigReal(mpmath.mpf(value.real), digits),
            im=BigReal(mpmath.mpf(value.imag), digits),
            err_bound=float(err_bound),
            method=method,
        )


@dataclass(frozen=True)
class ExactT:
    """Exact symbolic abscissa ``t = q * k + offset``.

    ``q`` is an arbitrary-size integer count of k-units for the base pair;
    ``offset`` is a small rational (|offset| <= 1) used by scan windows.
    Confluence points produced by the search always have offset 0 and even q.
    """

    q: int
    base_pair: tuple[int, int] = (2, 3)
    offset: Fraction = field(default=Fraction(0))

    def __post_init__(self):
        if not isinstance(self.q, int) or isinstance(self.q, bool):
            raise DomainError(f"q must be a Python int, got {type(self.q).__name__}")
        if self.q < 0:
            raise DomainError(f"q must be nonnegative, got {self.q}")
        p1, p2 = self.base_pair
        if not (is_prime(p1) and is_prime(p2)):
            raise DomainError(f"base pair {self.base_pair} must be prime")
        if not p1 < p2:
            raise DomainError(f"base pair must satisfy p1 < p2, got {self.base_pair}")
        offset = self.offset
        if not isinstance(offset, Fraction):
            offset = Fraction(offset)
            object.__setattr__(self, "offset", offset)
        if abs(offset) > 1:
            raise DomainError(f"|offset| must be <= 1, got {offset}")
        if self.q == 0 and offset < 0:
            raise DomainError("t would be negative (q = 0 with negative offset)")

    # -- helpers ---------------------------------------------------------
    @property
    def q_digits(self) -> int:
        return len(str(self.q)) if self.q else 1

    def advance(self, gap: int) -> "ExactT":
        """Exact translation by ``gap`` k-units (integer arithmetic on q)."""
        if not isinstance(gap, int):
            raise DomainError("gap must be an integer number of k-units")
        return replace(self, q=self.q + gap)

    def with_offset(self, offset: Union[Fraction, int, str]) -> "ExactT":
        return replace(self, offset=Fraction(offset))

    def __str__(self) -> str:
        base = f"{self.q}k{self.base_pair}"
        if self.offset:
            sign = "+" if self.offset > 0 else "-"
            base += f" {sign} {abs(self.offset)}"
        return base


# ---------------------------------------------------------------------------
# Constant cache: (name, digits) -> mpf, computed once per precision level.
# ---------------------------------------------------------------------------

_cache: dict[tuple, mpmath.mpf] = {}
# reentrant: computing one constant may recursively warm its ingredients
_cache_lock = threading.RLock()


def _const(key: tuple, digits: int, compute) -> mpmath.mpf:
    full_key = key + (digits,)
    hit = _cache.get(full_key)
    if hit is not None:
        return hit
    with _cache_lock:
        hit = _cache.get(full_key)
        if hit is None:
            with mp.workdps(digits + 10):
                hit = compute()
            _cache[full_key] = hit
    return hit


def pi_value(digits: int) -> mpmath.mpf:
    """pi to ``digits`` significant digits (cached)."""
    return _const(("pi",), digits, lambda: +mp.pi)


def _log_prime_raw(p: int, digits: int) -> mpmath.mpf:
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    return _const(("log", p), digits, lambda: mp.log(p))


def log_prime(p: int, digits: int) -> BigReal:
    """log p to ``digits`` significant decimal digits; cached, bit-stable."""
    if digits < MIN_DIGITS:
        raise PrecisionError(f"digits must be >= {MIN_DIGITS}, got {digits}")
    return BigReal(_log_prime_raw(p, digits), digits)


def _k_unit_raw(base_pair: tuple[int, int], digits: int) -> mpmath.mpf:
    p1, p2 = base_pair
    return _const(
        ("k", p1, p2),
        digits,
        lambda: mp.pi / (_log_prime_raw(p2, digits) - _log_prime_raw(p1, digits)),
    )


def k_unit(base_pair: tuple[int, int], digits: int = 50) -> BigReal:
    """The base unit k = pi / (log p2 - log p1) for a prime pair."""
    p1, p2 = base_pair
    if not (is_prime(p1) and is_prime(p2) and p1 < p2):
        raise DomainError(f"invalid base pair {base_pair}")
    return BigReal(_k_unit_raw(base_pair, digits), max(digits, MIN_DIGITS))


def _k_log_raw(base_pair: tuple[int, int], p: int, digits: int) -> mpmath.mpf:
    """k * log p at ``digits`` digits (the per-step phase advance)."""
    p1, p2 = base_pair
    return _const(
        ("klog", p1, p2, p),
        digits,
        lambda: _k_unit_raw(base_pair, digits) * _log_prime_raw(p, digits),
    )


def working_digits(t: ExactT) -> int:
    """Default working precision for computations involving ``t``.

    The reduction of ``t * log p`` modulo 2*pi cancels roughly as many
    digits as q has, so precision must scale with the size of q.
    """
    return max(50, t.q_digits + 20)


def to_real(t: ExactT, digits: int) -> BigReal:
    """Numeric value of ``t``, accurate to ``digits`` significant digits.

    Rejects requests that cannot be honoured: representing q*k to full
    accuracy requires carrying at least ``q_digits + 20`` digits.
    """
    needed = t.q_digits + 20
    if digits < needed:
        raise PrecisionError(
            f"to_real needs >= {needed} digits for q with {t.q_digits} "
            f"digits, got {digits}"
        )
    digits = max(digits, MIN_DIGITS)
    with mp.workdps(digits + 10):
        val = mpmath.mpf(t.q) * _k_unit_raw(t.base_pair, digits + 10)
        if t.offset:
            val += mpmath.mpf(t.offset.numerator) / t.offset.denominator
        return BigReal(+val, digits)


def wrap_residue(x) -> mpmath.mpf:
    """Wrap any angle into the canonical residue range [-pi/2, 3*pi/2)."""
    two_pi = 2 * mp.pi
    x = mpmath.fmod(x, two_pi)
    if x < -mp.pi / 2:
        x += two_pi
    elif x >= 3 * mp.pi / 2:
        x -= two_pi
    return x


def _residue_at(t: ExactT, p: int, dps: int) -> mpmath.mpf:
    with mp.workdps(dps):
        angle = mpmath.mpf(t.q) * _k_log_raw(t.base_pair, p, dps)
        if t.offset:
            off = mpmath.mpf(t.offset.numerator) / t.offset.denominator
            angle += off * _log_prime_raw(p, dps)
        return wrap_residue(angle - mp.pi / 2)


def _circular_diff(a: mpmath.mpf, b: mpmath.mpf) -> float:
    """|a - b| on the circle (guards the wrap at the range edges)."""
    d = abs(float(a - b))
    return min(d, abs(d - float(2 * mpmath.pi)))


def residue(t: ExactT, p: int) -> BigReal:
    """Shifted residue mod(t*log p, 2*pi) - pi/2, in [-pi/2, 3*pi/2).

    Accurate to 1e-12 absolute; working precision is chosen from the size
    of q and escalated automatically until two consecutive precision levels
    agree, so callers never manage precision themselves.
    """
    if not is_prime(p):
        raise DomainError(f"{p} is not prime")
    dps = working_digits(t)
    prev = _residue_at(t, p, dps)
    for _ in range(6):
        dps += 20
        cur = _residue_at(t, p, dps)
        if _circular_diff(cur, prev) <= RESIDUE_ABS_TOL / 10:
            return BigReal(cur, max(MIN_DIGITS, dps - t.q_digits))
        prev = cur
    raise PrecisionError(
        f"residue failed to stabilise for q with {t.q_digits} digits"
    )
