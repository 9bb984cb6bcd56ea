"""Numeric codings: Cantor pairing, the rational enumeration, integer codes.

The rational enumeration lists 0 first and then walks the positive reduced
fractions p/q diagonal by diagonal (by p + q, then by p), emitting each
positive value immediately followed by its negation::

    0, 1, -1, 1/2, -1/2, 2, -2, 1/3, -1/3, 3, -3, 1/4, ...

Ranking a fraction needs the totient summatory function, which is computed
with a sieve for small arguments and the usual Dirichlet-hyperbola recursion
above that.
"""

from fractions import Fraction
from functools import lru_cache
from math import gcd, isqrt

import numpy as np

__all__ = [
    "pair_encode",
    "pair_decode",
    "rat_encode",
    "rat_decode",
    "int_encode",
    "int_decode",
    "totient_sum",
]


def pair_encode(m: int, n: int) -> int:
    """Cantor pairing ``<m, n> = (m+n)(m+n+1)/2 + n``."""
    if m < 0 or n < 0:
        raise ValueError("pairing is defined on naturals only")
    s = m + n
    return s * (s + 1) // 2 + n


def pair_decode(k: int) -> tuple[int, int]:
    """Inverse of :func:`pair_encode`, returning ``(m, n)``."""
    if k < 0:
        raise ValueError("pairing is defined on naturals only")
    s = (isqrt(8 * k + 1) - 1) // 2
    n = k - s * (s + 1) // 2
    return s - n, n


def fst(k: int) -> int:
    return pair_decode(k)[0]


def snd(k: int) -> int:
    return pair_decode(k)[1]


# ---------------------------------------------------------------------------
# totient summatory function  Phi(n) = sum_{t <= n} phi(t)

_SIEVE_LIMIT = 1 << 20
_sieve_cache: np.ndarray | None = None
_big_phi: dict[int, int] = {}


def _sieve() -> np.ndarray:
    global _sieve_cache
    if _sieve_cache is None:
        n = _SIEVE_LIMIT
        phi = np.arange(n + 1, dtype=np.int64)
        for p in range(2, n + 1):
            if phi[p] == p:  # p is prime
                phi[p::p] -= phi[p::p] // p
        _sieve_cache = np.cumsum(phi)
        _sieve_cache[0] = 0
    return _sieve_cache


def totient_sum(n: int) -> int:
    """Return ``sum(phi(t) for t in 1..n)`` (0 for n < 1)."""
    if n < 1:
        return 0
    if n <= _SIEVE_LIMIT:
        return int(_sieve()[n])
    hit = _big_phi.get(n)
    if hit is not None:
        return hit
    # Phi(n) = n(n+1)/2 - sum_{d=2}^{n} Phi(n // d), grouped by equal quotients
    total = n * (n + 1) // 2
    d = 2
    while d <= n:
        q = n // d
        d_hi = n // q
        total -= (d_hi - d + 1) * totient_sum(q)
        d = d_hi + 1
    _big_phi[n] = total
    return total


@lru_cache(maxsize=4096)
def _prime_factors(n: int) -> tuple[int, ...]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1 if d == 2 else 2
    if n > 1:
        out.append(n)
    return tuple(out)


def _coprime_count(x: int, s: int) -> int:
    """Number of integers in ``1..x`` coprime to ``s`` (inclusion-exclusion)."""
    primes = _prime_factors(s)
    total = 0
    for mask in range(1 << len(primes)):
        prod, bits = 1, 0
        for i, p in enumerate(primes):
            if mask >> i & 1:
                prod *= p
                bits += 1
        total += (-1) ** bits * (x // prod)
    return total


def _positive_rank(q: Fraction) -> int:
    """1-based position of a positive rational in the diagonal listing."""
    p, d = q.numerator, q.denominator
    s = p + d
    before = totient_sum(s - 1) - 1  # pairs on diagonals 2 .. s-1
    return before + _coprime_count(p - 1, s) + 1


def _positive_unrank(j: int) -> Fraction:
    # diagonal s holds ranks totient_sum(s-1) .. totient_sum(s) - 1
    lo, hi = 2, 4
    while totient_sum(hi) - 1 < j:
        hi *= 2
    while lo < hi:
        mid = (lo + hi) // 2
        if totient_sum(mid) - 1 >= j:
            hi = mid
        else:
            lo = mid + 1
    s = lo
    r = j - (totient_sum(s - 1) - 1)  # r-th numerator coprime to s
    a, b = 1, s - 1
    while a < b:
        mid = (a + b) // 2
        if _coprime_count(mid, s) >= r:
            b = mid
        else:
            a = mid + 1
    return Fraction(a, s - a)


@lru_cache(maxsize=1 << 16)
def rat_decode(n: int) -> Fraction:
    """The ``n``-th rational of the enumeration."""
    if n < 0:
        raise ValueError("rational codes are naturals")
    if n == 0:
        return Fraction(0)
    j = (n + 1) // 2
    q = _positive_unrank(j)
    return q if n % 2 == 1 else -q


@lru_cache(maxsize=1 << 16)
def rat_encode(q) -> int:
    """Code of the rational ``q`` (inverse of :func:`rat_decode`)."""
    q = Fraction(q)
    if q == 0:
        return 0
    j = _positive_rank(abs(q))
    return 2 * j - 1 if q > 0 else 2 * j


def int_encode(k: int) -> int:
    """Integer coding ``k -> 2k`` for ``k >= 0`` and ``k -> 1 - 2k`` otherwise."""
    return 2 * k if k >= 0 else 1 - 2 * k


def int_decode(n: int) -> int:
    """Inverse of :func:`int_encode`; code 1 is not in the image."""
    if n % 2 == 0:
        return n // 2
    if n == 1:
        raise ValueError("1 is not an integer code")
    return (1 - n) // 2


def coprime(p: int, q: int) -> bool:
    return gcd(p, q) == 1
