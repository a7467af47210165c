"""Vectorized Euler-Maclaurin main sums for zeta(sigma + it) at large t.

The dominant cost of evaluating zeta(sigma+it) by Euler-Maclaurin is the
main sum  sum_{n=1}^{N} n^{-sigma} e^{-i t log n}  with N ~ t/pi, which for
t ~ 10^9 means ~10^9 terms.  Plain float64 cannot carry the phase
t*log n (up to ~10^10 radians) to the ~1e-12 accuracy the evaluation needs,
and arbitrary-precision term-by-term evaluation is thousands of times too
slow.  This module computes the phases in blockwise double-double style:

* small n (n <= n_small): the phase t*log n is reduced mod 2*pi one term at
  a time in arbitrary precision (exact), then cos/sin are vectorized;
* large n: within a block [n0, n0+B), B = n0 >> s, the phase is expanded as
  t*log n0 + t*log(1+x), x = j/n0 <= 2^-s.  The block base angle t*log n0
  is reduced mod 2*pi in arbitrary precision; the linear term (t/n0)*j is
  carried in double-double with an exact 26-bit-split leading product; the
  quadratic term and the tail of the log series are small enough for plain
  float64 once the block shift s (>= 11) is widened until the quadratic
  term t*x^2/2 sits below ~2^(2s+1)-th of t, keeping its rounding under the
  fixed floor.  The accumulated angle is reduced with a three-part
  Cody-Waite representation of 2*pi, keeping every phase accurate to
  ~5e-13 radians at any t the evaluator accepts.

The result is a float64 (re, im) pair of the main sum, accurate to roughly
1e-12 relative, at tens of millions of terms per second.
"""

from __future__ import annotations

import mpmath
import numpy as np
from mpmath import mp

__all__ = ["block_shift", "main_sum", "line_values_batch"]

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp split constant

# Per-phase rounding floor (radians) from the double-double accumulation and
# the Cody-Waite reduction, independent of t.
PHASE_ROUNDING_FLOOR = 2.5e-13
# Relative rounding picked up by the plain-float64 quadratic term on its way
# through ~10 operations.
_QUAD_RELATIVE_ROUNDING = 1.2e-15


def block_shift(t: float) -> int:
    """Block-width shift s (B = n0 >> s) keeping the float64 quadratic phase
    term t*x^2/2 <= t*2^-(2s+1) rounded below the fixed phase floor."""
    shift = 11
    while (
        shift < 26
        and t * 2.0 ** (-(2 * shift + 1)) * _QUAD_RELATIVE_ROUNDING
        > PHASE_ROUNDING_FLOOR
    ):
        shift += 1
    return shift


def _split26(a: float) -> tuple[float, float]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod(a: float, b: float) -> tuple[float, float]:
    """Exact product a*b = hi + lo via Dekker's algorithm."""
    hi = a * b
    ah, al = _split26(a)
    bh, bl = _split26(b)
    lo = ((ah * bh - hi) + ah * bl + al * bh) + al * bl
    return hi, lo


def _cody_waite_two_pi() -> tuple[float, float, float]:
    """2*pi = TH + TM + TL with TH, TM carrying <= 26 significant bits,
    so q*TH and q*TM are exact float64 products for integer q < 2**27."""
    with mp.workdps(60):
        two_pi = 2 * mp.pi
        th = _split26(float(two_pi))[0]
        tm = _split26(float(two_pi - th))[0]
        tl = float(two_pi - th - tm)
    return th, tm, tl


_TH, _TM, _TL = _cody_waite_two_pi()
_INV_TWO_PI = 1.0 / (2.0 * np.pi)


def _amplitudes(n: np.ndarray, sigma: float) -> np.ndarray:
    if sigma == 1.0:
        return 1.0 / n
    return np.exp(-sigma * np.log(n))


def main_sum(
    sigma: float,
    t: mpmath.mpf,
    n_terms: int,
    n_small: int = 16384,
    max_block: int = 4_000_000,
) -> tuple[float, float]:
    """Return (re, im) of sum_{n=1}^{n_terms} n^{-sigma} e^{-i t log n}.

    ``t`` must be an mpmath float carrying enough precision that
    t*log(n) mod 2*pi is meaningful; the ambient mpmath precision at call
    time sets the working precision of the exact block-base reductions.
    """
    dps = max(30, mp.dps)
    sigma = float(sigma)
    total_re = 0.0
    total_im = 0.0

    head = min(n_terms, max(2, n_small))
    with mp.workdps(dps):
        two_pi = 2 * mp.pi
        phases = np.empty(head, dtype=np.float64)
        phases[0] = 0.0
        for n in range(2, head + 1):
            phases[n - 1] = float(mpmath.fmod(t * mp.ln(n), two_pi))
    ns = np.arange(1, head + 1, dtype=np.float64)
    w = _amplitudes(ns, sigma)
    total_re += float(np.dot(w, np.cos(phases)))
    total_im += float(np.dot(w, -np.sin(phases)))
    if n_terms <= head:
        return total_re, total_im

    t_hi = float(t)
    with mp.workdps(dps):
        t_lo = float(t - mpmath.mpf(t_hi))

    shift = block_shift(t_hi)
    n0 = head + 1
    while n0 <= n_terms:
        block = min(max(1, n0 >> shift), max_block, n_terms - n0 + 1)
        with mp.workdps(dps):
            theta0 = float(mpmath.fmod(t * mp.ln(n0), 2 * mp.pi))

        # Linear phase coefficient a1 = t / n0 in double-double.
        a1_hi = t_hi / n0
        ph, pl = _two_prod(a1_hi, float(n0))
        a1_lo = ((t_hi - ph) - pl + t_lo) / n0
        a1h, a1l = _split26(a1_hi)
        a2 = t_hi / (2.0 * n0 * n0)

        j = np.arange(block, dtype=np.float64)
        x = j / n0
        # t*log(1+x) = a1*j - a2*j^2 + t*x^3*(1/3 - x/4 + x^2/5 - ...)
        u1 = a1h * j  # exact: 26-bit coefficient times a small integer
        u2 = a1l * j
        series = x * x * x * (
            1.0 / 3.0
            + x * (-0.25 + x * (0.2 + x * (-1.0 / 6.0 + x * (1.0 / 7.0 - x * 0.125))))
        )
        u3 = a1_lo * j - a2 * j * j + t_hi * series + theta0

        q = np.rint((u1 + u2 + u3) * _INV_TWO_PI)
        phi = ((u1 - q * _TH) + u2 - q * _TM) + (u3 - q * _TL)

        n = n0 + j
        w = _amplitudes(n, sigma)
        total_re += float(np.dot(w, np.cos(phi)))
        total_im += float(np.dot(w, -np.sin(phi)))
        n0 += block

    return total_re, total_im


def line_values_batch(ts: np.ndarray, n_terms_of, tail_of) -> tuple[np.ndarray, np.ndarray]:
    """zeta(1+it) for a batch of modest t values (scan acceleration).

    For t up to ~10^7 the phase t*log n stays below ~2e8 radians, where
    a plain float64 product is still accurate to ~3e-8 radians -- ample for
    the ~6-digit needs of sign scans.  ``n_terms_of(t)`` supplies the
    Euler-Maclaurin cutoff and ``tail_of(t, N)`` the complex tail
    correction; both are provided by the evaluator so the cutoff policy
    lives in one place.

    Returns (re, im) arrays; hits must be re-validated with the full
    evaluator before being reported.
    """
    ts = np.asarray(ts, dtype=np.float64)
    re = np.empty_like(ts)
    im = np.empty_like(ts)
    for i, t in enumerate(ts):
        n_terms = n_terms_of(t)
        n = np.arange(1, n_terms + 1, dtype=np.float64)
        phi = t * np.log(n)
        w = 1.0 / n
        s_re = float(np.dot(w, np.cos(phi)))
        s_im = float(np.dot(w, -np.sin(phi)))
        tail = tail_of(t, n_terms)
        re[i] = s_re + tail.real
        im[i] = s_im + tail.imag
    return re, im
