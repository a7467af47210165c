"""Small-prime utilities.

The package only ever needs the first few dozen primes (for check-prime
sequences) and primality tests of small user-supplied base pairs.  A tiny
sieve keeps the import graph free of heavyweight symbolic dependencies so
that CLI cold-start stays well under a second.
"""

from __future__ import annotations

from functools import lru_cache


@lru_cache(maxsize=None)
def _sieve(limit: int) -> tuple[int, ...]:
    flags = bytearray([1]) * (limit + 1)
    flags[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if flags[i]:
            flags[i * i :: i] = b"\x00" * len(flags[i * i :: i])
    return tuple(i for i, f in enumerate(flags) if f)


def first_primes(count: int) -> list[int]:
    """Return the first ``count`` primes in ascending order."""
    if count <= 0:
        return []
    limit = 32
    while True:
        primes = _sieve(limit)
        if len(primes) >= count:
            return list(primes[:count])
        limit *= 4


def is_prime(n: int) -> bool:
    """Deterministic primality test for the small inputs used here."""
    if n < 2:
        return False
    if n < 4:
        return True
    if n % 2 == 0:
        return False
    i = 3
    while i * i <= n:
        if n % i == 0:
            return False
        i += 2
    return True


def prime_sequence(base_pair: tuple[int, int], count: int) -> list[int]:
    """Check-prime ordering for a run: the base pair first, then the
    remaining primes in ascending order.

    For the canonical pair (2, 3) this is simply 2, 3, 5, 7, 11, ...; for a
    pair like (5, 7) it is 5, 7, 2, 3, 11, 13, ...
    """
    p1, p2 = base_pair
    rest = [p for p in first_primes(count + 2) if p not in (p1, p2)]
    seq = [p1, p2] + rest
    return seq[:count]
