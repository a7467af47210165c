"""Double-double helpers for vectorized lattice-residue prefiltering.

The lattice residues r_p(q*k) = 2*pi*frac(q*c_p) - pi/2, with
c_p = k*log(p)/(2*pi), lose about as many digits as q has when computed
naively in float64.  For integer q below 2**53 a double-double
representation of c_p recovers frac(q*c_p) to ~1e-15 cycles in pure
float64 array arithmetic -- fast enough to prefilter millions of lattice
points per second.  Callers confirm every surviving candidate (and every
point within ``margin`` of a window edge) in arbitrary precision, so the
prefilter only has to be *reliably conservative*, never exact.
"""

from __future__ import annotations

import mpmath
import numpy as np
from mpmath import mp

from .errors import DomainError
from .precision import _k_log_raw

__all__ = [
    "EXACT_Q_LIMIT",
    "SAFE_MARGIN_CYCLES",
    "cycles_per_step",
    "frac_cycles",
    "quarter_distance",
]

# Integer lattice indices remain exactly representable in float64 below this.
EXACT_Q_LIMIT = 2**53

# The frac computation below is good to ~1e-15 cycles; windows widened by
# this margin before the arbitrary-precision confirmation pass are safe.
SAFE_MARGIN_CYCLES = 1e-12

_SPLIT = 134217729.0  # 2**27 + 1, Veltkamp split constant


def _split_arr(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    c = _SPLIT * a
    hi = c - (c - a)
    return hi, a - hi


def _two_prod_arr(a: np.ndarray, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Exact elementwise product a*b = hi + lo (Dekker)."""
    hi = a * b
    ah, al = _split_arr(a)
    bh, bl = _split_arr(np.float64(b))
    lo = ((ah * bh - hi) + ah * bl + al * bh) + al * bl
    return hi, lo


def cycles_per_step(base_pair: tuple[int, int], p: int, dps: int = 60) -> tuple[float, float]:
    """(k * log p) / (2*pi) as a double-double (hi, lo) pair.

    One lattice step q -> q+1 advances the phase of prime p by exactly this
    many cycles; frac(q * cycles) recovers the phase of lattice point q.
    """
    with mp.workdps(dps):
        c = _k_log_raw(base_pair, p, dps) / (2 * mp.pi)
        hi = float(c)
        lo = float(c - mpmath.mpf(hi))
    return hi, lo


def frac_cycles(q: np.ndarray, c: tuple[float, float]) -> np.ndarray:
    """frac(q * (c_hi + c_lo)) in [0, 1) for integer-valued float64 q.

    Accurate to ~1e-15 cycles for |q| < 2**53: the leading product is split
    exactly (Dekker), its integer part is discarded while still exact, and
    the low-order parts are added in at fractional magnitude.
    """
    q = np.asarray(q, dtype=np.float64)
    if q.size and float(np.max(np.abs(q))) >= EXACT_Q_LIMIT:
        raise DomainError(
            f"lattice prefilter requires |q| < 2**53; got {np.max(np.abs(q))}"
        )
    c_hi, c_lo = c
    p_hi, p_lo = _two_prod_arr(q, c_hi)
    f = p_hi - np.floor(p_hi)  # exact: both operands share the same exponent range
    f = f + p_lo
    f = f + q * c_lo
    f -= np.floor(f)
    # guard against f == 1.0 from the final rounding
    f[f >= 1.0] -= 1.0
    return f


def quarter_distance(q: np.ndarray, c: tuple[float, float]) -> np.ndarray:
    """Signed circular distance of frac(q*c) from 1/4, in (-1/2, 1/2] cycles.

    2*pi times this value equals the canonical residue of prime p at
    lattice point q whenever that residue lies in (-pi, pi], which covers
    every acceptance window used anywhere in the package (half-widths are
    below pi/2); residue-window tests therefore reduce to window tests here.
    """
    d = frac_cycles(q, c) - 0.25
    return d - np.rint(d)
