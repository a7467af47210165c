"""High-precision evaluation of zeta(sigma + it) and Euler-product sums.

Engines
-------
``em``
    Scalar Euler-Maclaurin summation in arbitrary precision: main sum to
    N = max(10*digits, t/pi), trapezoidal and Bernoulli corrections with a
    monitored remainder.  The workhorse for real-axis values and moderate t.
``em-vector``
    The same formula with the main sum computed by the blockwise
    double-double kernel in :mod:`confluence._mainsum`; handles t up to a
    few 1e9 (or ~2e11 when extended mode is enabled) at float64 accuracy,
    i.e. requests of at most 9 digits.
``dirichlet``
    Plain tail-bounded Dirichlet sum; only sensible well right of sigma = 1
    on the real axis, and chosen automatically only when it is cheap.
``reference``
    Delegation to mpmath's zeta as an independent cross-check engine and
    as the default above the package's own Euler-Maclaurin range.  Results
    are explicitly labelled so callers can tell them apart.

Beyond ``ceiling`` (default 1e12) evaluation is refused outright: such
points are reported as unverifiable rather than silently approximated.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Union

import mpmath
from mpmath import mp

from . import _mainsum
from ._primes import first_primes
from .errors import DomainError, EvaluationCeilingError, PoleProximityError, PrecisionError
from .precision import (
    MIN_DIGITS,
    BigReal,
    ComplexValue,
    ExactT,
    residue,
    to_real,
)

__all__ = [
    "EvalRequest",
    "DEFAULT_CEILING",
    "zeta",
    "euler_log_partial",
    "arg_buildup",
    "crossing_index",
    "vector_engine_max_t",
]

#: Hard ceiling for any zeta evaluation; beyond this the point is declared
#: unverifiable (only euler_log_partial is offered there).
DEFAULT_CEILING = 1e12

#: auto-policy bounds
_SCALAR_FAST_TERMS = 50_000     # scalar EM preferred below this many terms
_SCALAR_MAX_TERMS = 4_000_000   # scalar EM refused above this many terms
_VECTOR_MAX_DIGITS = 10         # float64 kernel accuracy limit
_VECTOR_DEFAULT_MAX_T = 6.0e9   # ~1 minute of main sum
_VECTOR_EXTENDED_MAX_T = 2.0e11  # ~half an hour of main sum


def vector_engine_max_t() -> float:
    """Largest t the vectorized engine will take on under the auto policy.

    Set ``CONFLUENCE_EXTENDED=1`` to raise the bound for long, explicitly
    requested reproductions; the default keeps single evaluations around a
    minute.
    """
    if os.environ.get("CONFLUENCE_EXTENDED", "").strip() in ("1", "true", "yes"):
        return _VECTOR_EXTENDED_MAX_T
    return _VECTOR_DEFAULT_MAX_T


@dataclass(frozen=True)
class EvalRequest:
    """A single zeta evaluation: s = sigma + i*t to ``digits`` digits."""

    sigma: float
    t: Union[ExactT, str, float, int]
    digits: int = 30
    engine: str = "auto"
    ceiling: float = DEFAULT_CEILING

    def __post_init__(self):
        if self.digits < 10:
            raise DomainError(f"digits must be >= 10, got {self.digits}")
        if float(self.sigma) < 1.0:
            raise DomainError(f"sigma must be >= 1, got {self.sigma}")
        if self.engine not in ("auto", "em", "em-vector", "dirichlet", "reference"):
            raise DomainError(f"unknown engine {self.engine!r}")


def _t_as_mpf(t, digits: int) -> tuple[mpmath.mpf, int]:
    """Convert any accepted t form to an mpf carrying enough precision for
    phase reduction; returns (value, working_dps)."""
    if isinstance(t, ExactT):
        dps = max(digits + 15, t.q_digits + 25)
        return to_real(t, max(t.q_digits + 20, digits + 15)).value, dps
    if isinstance(t, str):
        dps = digits + 25
        with mp.workdps(dps):
            return +mpmath.mpf(t), dps
    if isinstance(t, (int, float)):
        dps = digits + 25
        with mp.workdps(dps):
            return +mpmath.mpf(t), dps
    raise DomainError(f"unsupported t type {type(t).__name__}")


def _em_cutoff(t: float, digits: int) -> int:
    return int(max(10 * digits, math.ceil(t / math.pi))) if t > 0 else 10 * digits


def _em_corrections(s, n_terms: int, target: float):
    """Corrections to add to sum_{n<=N} n^-s:  -N^-s/2 + N^(1-s)/(s-1) +
    Bernoulli terms.  Returns (correction, remainder_bound); raises
    PrecisionError if the asymptotic series cannot reach ``target``."""
    N = n_terms
    n_pow_ms = mpmath.power(N, -s)              # N^-s
    corr = -n_pow_ms / 2 + N * n_pow_ms / (s - 1)
    poch = s                                     # s(s+1)...(s+2k-2)
    n_pow = n_pow_ms / N                         # N^(-s-2k+1), k=1
    sigma = mpmath.re(s)
    best = mpmath.inf
    k = 1
    while k <= 60:
        term = mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * poch * n_pow
        mag = abs(term)
        if mag > best:
            break                                # asymptotic turnover
        corr += term
        best = mag
        # remainder after adding T_k is bounded via T_{k+1}
        poch *= (s + 2 * k - 1) * (s + 2 * k)
        n_pow /= N * N
        k += 1
        nxt = abs(mpmath.bernoulli(2 * k) / mpmath.factorial(2 * k) * poch * n_pow)
        bound = float(nxt * abs((s + 2 * k + 1) / (sigma + 2 * k + 1)))
        if bound < target:
            return corr, bound
    raise PrecisionError(
        f"Euler-Maclaurin remainder stalled above target {target:.3g} at N={N}"
    )


def _zeta_em_scalar(sigma, t_mpf, digits: int, dps: int) -> ComplexValue:
    t_float = float(t_mpf)
    n_terms = _em_cutoff(t_float, digits)
    if n_terms > _SCALAR_MAX_TERMS:
        raise PrecisionError(
            f"scalar Euler-Maclaurin would need {n_terms} terms; use the "
            f"vectorized or reference engine"
        )
    target = 10.0 ** (-(digits + 3))
    last_error = None
    for _ in range(3):
        wp = max(dps, digits + 15 + int(math.log10(n_terms + 1)))
        with mp.workdps(wp):
            s = mpmath.mpc(mpmath.mpf(sigma), t_mpf)
            total = mpmath.mpc(0)
            for n in range(1, n_terms + 1):
                total += mpmath.power(n, -s)
            try:
                corr, rem = _em_corrections(s, n_terms, target)
            except PrecisionError as exc:   # remainder stalled: enlarge N
                last_error = exc
                n_terms *= 2
                continue
            total += corr
            err = rem + 10.0 ** (-digits - 2)
            return ComplexValue.from_mpc(total, min(err, 10.0 ** (-digits)),
                                         digits, "em")
    raise last_error


def _vector_error_floor(t_float: float, n_terms: int) -> float:
    """Certified error floor of the float64 kernel for a given main sum.

    Per-term phase error: the plain-float64 quadratic phase term (magnitude
    t * 2^-(2s+1) at block shift s) picks up relative rounding, on top of a
    fixed floor from the double-double accumulation and angle reduction.
    The phase errors enter with weights n^-sigma whose sum is at most
    1 + ln N for sigma >= 1.
    """
    shift = _mainsum.block_shift(t_float)
    quad = t_float * 2.0 ** (-(2 * shift + 1)) * 1.2e-15
    phase = quad + _mainsum.PHASE_ROUNDING_FLOOR
    return phase * (1.0 + math.log(max(n_terms, 2)))


def _zeta_em_vector(sigma, t_mpf, digits: int, dps: int) -> ComplexValue:
    if digits > _VECTOR_MAX_DIGITS:
        raise PrecisionError(
            f"vectorized engine is limited to {_VECTOR_MAX_DIGITS} digits"
        )
    t_float = float(t_mpf)
    n_terms = _em_cutoff(t_float, digits)
    floor = _vector_error_floor(t_float, n_terms)
    if floor > 0.9 * 10.0 ** (-digits):
        raise PrecisionError(
            f"vectorized engine cannot certify {digits} digits at t={t_float:g}"
        )
    with mp.workdps(dps):
        re, im = _mainsum.main_sum(float(sigma), t_mpf, n_terms)
    with mp.workdps(40):
        s = mpmath.mpc(mpmath.mpf(sigma), t_mpf)
        target = 10.0 ** (-(digits + 3))
        corr, rem = _em_corrections(s, n_terms, target)
        total = mpmath.mpc(re, im) + corr
        err = rem + floor
        if err > 10.0 ** (-digits):
            raise PrecisionError(
                f"vectorized engine cannot certify {digits} digits here"
            )
        return ComplexValue.from_mpc(total, err, MIN_DIGITS, "em-vector")


def _zeta_dirichlet(sigma, digits: int) -> ComplexValue:
    """Real-axis direct Dirichlet sum with integral tail bound."""
    sig = float(sigma)
    if sig < 2:
        raise DomainError("direct Dirichlet sum is reserved for sigma >= 2")
    n_terms = int(math.ceil((10.0 ** (digits + 2) / (sig - 1)) ** (1.0 / (sig - 1))))
    if n_terms > 2_000_000:
        raise PrecisionError(
            f"Dirichlet sum would need {n_terms} terms at sigma={sig}"
        )
    with mp.workdps(digits + 15):
        s = mpmath.mpf(sigma)
        total = mpmath.mpf(0)
        for n in range(n_terms, 0, -1):   # ascending magnitude
            total += mpmath.power(n, -s)
        tail = mpmath.power(n_terms, 1 - s) / (s - 1)
        return ComplexValue.from_mpc(
            mpmath.mpc(total + tail / 2, 0), float(tail), digits, "dirichlet"
        )


def _zeta_reference(sigma, t_mpf, digits: int) -> ComplexValue:
    with mp.workdps(digits + 10):
        val = mpmath.zeta(mpmath.mpc(mpmath.mpf(sigma), t_mpf))
        return ComplexValue.from_mpc(val, 10.0 ** (-digits), digits, "reference")


def zeta(req: EvalRequest) -> ComplexValue:
    """Evaluate zeta at the requested point with the requested engine.

    The ``auto`` policy: direct Dirichlet when it is trivially cheap on the
    real axis; scalar Euler-Maclaurin while the term count is modest; the
    vectorized float64 kernel for large t while it can still certify the
    requested digits; the labelled reference engine beyond that, up to the
    hard ceiling.
    """
    t_mpf, dps = _t_as_mpf(req.t, req.digits)
    if t_mpf < 0:
        raise DomainError("t must be nonnegative")
    t_float = float(t_mpf)
    if t_float > req.ceiling:
        raise EvaluationCeilingError(t_float, req.ceiling)
    sigma = req.sigma
    if float(sigma) <= 1.0 + 1e-12 and t_float < 1e-3:
        raise PoleProximityError(
            f"zeta(s) is dominated by the pole at s=1 near sigma={float(sigma)}, "
            f"t={t_float}"
        )

    engine = req.engine
    if engine == "auto":
        n_scalar = _em_cutoff(t_float, req.digits)
        if t_float == 0 and float(sigma) >= 2:
            try:
                return _zeta_dirichlet(sigma, req.digits)
            except PrecisionError:
                engine = "em"
        if engine == "auto":
            vector_ok = (
                req.digits <= _VECTOR_MAX_DIGITS
                and t_float <= vector_engine_max_t()
                and _vector_error_floor(t_float, n_scalar)
                <= 0.9 * 10.0 ** (-req.digits)
            )
            if n_scalar <= _SCALAR_FAST_TERMS:
                engine = "em"
            elif vector_ok:
                engine = "em-vector"
            elif n_scalar <= _SCALAR_MAX_TERMS:
                engine = "em"
            else:
                engine = "reference"

    if engine == "em":
        return _zeta_em_scalar(sigma, t_mpf, req.digits, dps)
    if engine == "em-vector":
        return _zeta_em_vector(sigma, t_mpf, req.digits, dps)
    if engine == "dirichlet":
        return _zeta_dirichlet(sigma, req.digits)
    return _zeta_reference(sigma, t_mpf, req.digits)


def light_tail(t: float, n_terms: int) -> complex:
    """Float-precision Euler-Maclaurin tail for sigma = 1 scan batches."""
    s = complex(1.0, t)
    ln_n = math.log(n_terms)
    n_pow_ms = math.exp(-ln_n) * complex(math.cos(t * ln_n), -math.sin(t * ln_n))
    tail = -n_pow_ms / 2 + n_terms * n_pow_ms / (s - 1)
    tail += s * n_pow_ms / n_terms / 12.0
    return tail


def euler_log_partial(sigma, t, n_terms: int, digits: int = 30) -> ComplexValue:
    """Partial Euler-product logarithm -sum_{n<=N} log(1 - p_n^{-s}).

    Truncation error is the caller's concern; the error bound covers only
    the working-precision and phase-reduction error of the N computed
    terms, so the exact phases of t*log p survive arbitrarily large exact
    abscissae.
    """
    if n_terms < 0:
        raise DomainError("nTerms must be >= 0")
    if float(sigma) < 1:
        raise DomainError("sigma must be >= 1")
    if n_terms == 0:
        zero = BigReal(mpmath.mpf(0), digits)
        return ComplexValue(zero, zero, 0.0, "euler-log-partial")

    primes = first_primes(n_terms)
    phase_err = 0.0
    t_mpf = None
    if not isinstance(t, ExactT):
        t_mpf, t_dps = _t_as_mpf(t, digits)
    with mp.workdps(digits + 10):
        half_pi = mp.pi / 2
        total = mpmath.mpc(0)
        for p in primes:
            if isinstance(t, ExactT):
                phi = residue(t, p).value + half_pi
                phase_err += 1e-12
            else:
                with mp.workdps(t_dps):
                    phi = mpmath.fmod(t_mpf * mpmath.log(p), 2 * mp.pi)
            term = -mpmath.log(1 - mpmath.power(p, -mpmath.mpf(sigma))
                               * mpmath.exp(mpmath.mpc(0, -phi)))
            total += term
        err = phase_err + 10.0 ** (-digits)
        return ComplexValue.from_mpc(total, err, digits, "euler-log-partial")


def arg_buildup(max_n: int, digits: int = 30) -> list[tuple[int, BigReal]]:
    """Cumulative argument growth sum_{n<=N} arctan(1/p_n), one row per N."""
    if max_n < 1:
        raise DomainError("maxN must be >= 1")
    rows = []
    with mp.workdps(digits + 10):
        cum = mpmath.mpf(0)
        for i, p in enumerate(first_primes(max_n), start=1):
            cum += mpmath.atan(mpmath.mpf(1) / p)
            rows.append((i, BigReal(+cum, digits)))
    return rows


def crossing_index() -> int:
    """Smallest N whose cumulative argument exceeds pi/2."""
    with mp.workdps(40):
        half_pi = mp.pi / 2
        cum = mpmath.mpf(0)
        n = 0
        for p in first_primes(200):
            n += 1
            cum += mpmath.atan(mpmath.mpf(1) / p)
            if cum > half_pi:
                return n
    raise PrecisionError("argument buildup did not cross pi/2 within 200 primes")
