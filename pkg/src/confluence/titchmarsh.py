"""Disk bounds on log zeta(sigma+it) and the negativity threshold in sigma.

For sigma > 1 the values of log zeta(sigma+it) over all t lie in a disk:
its center is ``(1/2) log zeta(2 sigma)`` and its half-width is
``(1/2) log(zeta(sigma)^2 / zeta(2 sigma))``.  Whenever the half-width
stays below pi/2, the argument of zeta cannot reach +-pi/2 ... pi, so
Re zeta(sigma+it) is strictly positive on that whole vertical line.  The
``negativity_threshold`` is the sigma at which the half-width reaches
pi/2: only lines to its left can carry negative real parts.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass

import mpmath
from mpmath import mp

from .errors import DomainError
from .precision import MIN_DIGITS, BigReal
from .zetaeval import EvalRequest, zeta

__all__ = [
    "DiskBound",
    "can_be_negative",
    "disk_bound",
    "negativity_threshold",
]

_DEFAULT_DIGITS = 30
_BISECTION_MAX_ITER = 200

_threshold_cache: dict[int, BigReal] = {}
_threshold_lock = threading.Lock()


@dataclass(frozen=True)
class DiskBound:
    """Bounding disk of log zeta(sigma+it) on the vertical line sigma.

    ``radius`` is the outer bound on |log zeta| (center + halfwidth), the
    quantity that caps |arg zeta|; ``halfwidth`` is the disk's own radius
    about ``center``.  Both decrease strictly in sigma.
    """

    sigma: float
    center: BigReal
    halfwidth: BigReal
    radius: BigReal

    def __post_init__(self) -> None:
        if not self.sigma > 1:
            raise DomainError(f"disk bound requires sigma > 1, got {self.sigma}")
        if not (self.halfwidth.value > 0 and self.radius.value > 0):
            raise DomainError("disk bound must have positive extent")


def _log_zeta_real(sigma, digits: int) -> mpmath.mpf:
    """log zeta(sigma) for real sigma > 1, via the evaluator."""
    val = zeta(EvalRequest(sigma, 0, max(digits, 10)))
    with mp.workdps(digits + 10):
        return mpmath.log(val.re.value)


def disk_bound(sigma: float, digits: int = _DEFAULT_DIGITS) -> DiskBound:
    """Bounding disk of log zeta on the line Re s = sigma.

    center    = (1/2) log zeta(2 sigma)
    halfwidth = (1/2) log(zeta(sigma)^2 / zeta(2 sigma))
    radius    = center + halfwidth = log zeta(sigma)
    """
    if not sigma > 1:
        raise DomainError(f"disk bound requires sigma > 1, got {sigma}")
    digits = max(digits, MIN_DIGITS)
    with mp.workdps(digits + 10):
        log_zs = _log_zeta_real(sigma, digits + 5)
        log_z2s = _log_zeta_real(2 * sigma, digits + 5)
        center = log_z2s / 2
        halfwidth = log_zs - center
        return DiskBound(
            float(sigma),
            BigReal(center, digits),
            BigReal(halfwidth, digits),
            BigReal(log_zs, digits),
        )


def _halfwidth_float(sigma: float) -> float:
    return float(disk_bound(sigma, MIN_DIGITS).halfwidth.value)


def negativity_threshold(digits: int = 10) -> BigReal:
    """The sigma where the disk half-width reaches pi/2, by bisection.

    Re zeta(sigma+it) can be negative for some t only when
    sigma < negativity_threshold().  Accurate to 10^(-digits/2); the
    half-width is strictly decreasing, so bisection on (1, 2] is exact.
    """
    digits = int(digits)
    with _threshold_lock:
        cached = _threshold_cache.get(digits)
    if cached is not None:
        return cached

    tol = 10.0 ** (-digits / 2)
    target = float(mp.pi) / 2
    lo, hi = 1.000001, 2.0
    if _halfwidth_float(lo) < target:
        raise DomainError("half-width already below pi/2 at sigma = 1.000001")
    for _ in range(_BISECTION_MAX_ITER):
        if hi - lo <= tol:
            break
        mid = (lo + hi) / 2
        if _halfwidth_float(mid) >= target:
            lo = mid
        else:
            hi = mid
    result = BigReal(mpmath.mpf((lo + hi) / 2), MIN_DIGITS)
    with _threshold_lock:
        _threshold_cache[digits] = result
    return result


def can_be_negative(sigma: float) -> bool:
    """Whether Re zeta(sigma+it) < 0 is possible for some t (strict test:
    sigma < negativity_threshold())."""
    if not sigma > 1:
        raise DomainError(f"can_be_negative requires sigma > 1, got {sigma}")
    return float(sigma) < float(negativity_threshold().value)
