"""Segmented Liouville sieve, prefix sums and factorization profiles.

Signs are computed block by block: for every prime ``p`` up to the square root
of the block's upper end and every power ``p**k`` in range, the parity of
``Omega(n)`` is flipped for the multiples of ``p**k`` and ``p`` is divided out
of a cofactor array. Whatever cofactor survives is 1 or a single large prime,
which contributes one final flip.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from math import isqrt
from typing import Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError, EmptyRangeError, RangeNotMaterializedError, RangeOverflowError

U64_MAX = 2**64 - 1
SEGMENT_CAP = 2**26
BLOCK = 2**20
# above this, lambda_prefix refuses to sieve on demand
ON_DEMAND_LIMIT = 10**8
SPF_LIMIT = 10**8
_TRIAL_PRIME_LIMIT = 2**24


@lru_cache(maxsize=32)
def _primes_cached(limit: int) -> np.ndarray:
    if limit < 2:
        out = np.zeros(0, dtype=np.int64)
    else:
        is_prime = np.ones(limit + 1, dtype=bool)
        is_prime[:2] = False
        for p in range(2, isqrt(limit) + 1):
            if is_prime[p]:
                is_prime[p * p :: p] = False
        out = np.flatnonzero(is_prime).astype(np.int64)
    out.setflags(write=False)
    return out


def primes_up_to(limit: int) -> np.ndarray:
    """Primes ``<= limit`` as a read-only int64 array (Eratosthenes)."""
    return _primes_cached(int(limit))


def primes_in_range(lo: int, hi: int) -> np.ndarray:
    """Primes ``p`` with ``lo <= p <= hi``."""
    if hi < max(lo, 2):
        return np.zeros(0, dtype=np.int64)
    ps = primes_up_to(hi)
    return ps[np.searchsorted(ps, lo) :]


def _omega_parity_block(lo: int, hi: int) -> np.ndarray:
    """Liouville signs for ``lo <= n < hi`` as int8."""
    size = hi - lo
    rem = np.arange(lo, hi, dtype=np.uint64)
    parity = np.zeros(size, dtype=np.uint8)
    top = hi - 1
    for p in primes_up_to(isqrt(top)):
        p = int(p)
        pk = p
        while pk <= top:
            first = (-lo) % pk
            if first < size:
                parity[first::pk] ^= 1
                rem[first::pk] //= p
            pk *= p
    parity[rem > 1] ^= 1
    return (1 - 2 * parity.astype(np.int8)).astype(np.int8)


def _blocks(start: int, length: int, block: int):
    stop = start + length
    return [(lo, min(lo + block, stop)) for lo in range(start, stop, block)]


def _check_range(start: int, length: int) -> None:
    if length < 1:
        raise EmptyRangeError(f"empty range: len={length}")
    if start < 1:
        raise DomainError(f"start must be >= 1, got {start}")
    if start + length - 1 > U64_MAX:
        raise RangeOverflowError(f"range end {start + length - 1} exceeds 64 bits")


def lambda_values(start: int, length: int, *, workers: int = 1, block: int = BLOCK) -> np.ndarray:
    """Raw Liouville values for ``start <= n < start + length`` (no segment cap)."""
    start, length = int(start), int(length)
    _check_range(start, length)
    parts = ordered_map(lambda b: _omega_parity_block(*b), _blocks(start, length, block), workers)
    return parts[0] if len(parts) == 1 else np.concatenate(parts)


def lambda_sum(lo: int, hi: int, *, workers: int = 1, block: int = BLOCK) -> int:
    """Exact ``sum(lambda(n) for lo <= n <= hi)``; zero for an empty range."""
    if hi < lo:
        return 0
    sums = ordered_map(
        lambda b: int(_omega_parity_block(*b).sum(dtype=np.int64)),
        _blocks(lo, hi - lo + 1, block),
        workers,
    )
    return sum(sums)


@dataclass(frozen=True)
class LambdaSegment:
    """Contiguous block of Liouville values with the prefix sum just before it.

    ``signs[i]`` is lambda(start + i); ``prefix_base`` is L(start - 1).
    """

    start: int
    signs: np.ndarray = field(repr=False)
    prefix_base: int = 0

    def __post_init__(self):
        signs = np.asarray(self.signs, dtype=np.int8)
        if self.start < 1:
            raise DomainError("segment start must be >= 1")
        if signs.ndim != 1 or signs.size == 0:
            raise EmptyRangeError("segment must hold at least one value")
        if not np.all(np.abs(signs) == 1):
            raise DomainError("segment signs must be -1 or +1")
        if self.start == 1 and signs[0] != 1:
            raise DomainError("lambda(1) must be +1")
        signs = signs.copy()
        signs.setflags(write=False)
        object.__setattr__(self, "signs", signs)
        object.__setattr__(self, "prefix_base", int(self.prefix_base))

    @property
    def len(self) -> int:
        return int(self.signs.size)

    @property
    def stop(self) -> int:
        """Last covered n (inclusive)."""
        return self.start + self.len - 1

    def covers(self, n: int) -> bool:
        return self.start <= n <= self.stop

    def value(self, n: int) -> int:
        if not self.covers(n):
            raise RangeNotMaterializedError(f"n={n} outside [{self.start}, {self.stop}]")
        return int(self.signs[n - self.start])

    def prefix_sums(self) -> np.ndarray:
        """L(n) for every covered n, as int64."""
        return self.prefix_base + np.cumsum(self.signs, dtype=np.int64)

    def prefix(self, x: int) -> int:
        """L(x) for ``start - 1 <= x <= stop``."""
        if x == self.start - 1:
            return self.prefix_base
        if not self.covers(x):
            raise RangeNotMaterializedError(
                f"L({x}) needs coverage of [{self.start - 1}, {self.stop}]"
            )
        return self.prefix_base + int(self.signs[: x - self.start + 1].sum(dtype=np.int64))


def sieve_lambda(
    start: int,
    length: int,
    *,
    prefix_base: Optional[int] = None,
    segment_cap: int = SEGMENT_CAP,
    workers: int = 1,
) -> LambdaSegment:
    """Sieve lambda(n) for ``start <= n < start + length``.

    If ``prefix_base`` is not supplied it is computed by summing lambda over
    ``[1, start - 1]``, which costs O(start).
    """
    start, length = int(start), int(length)
    _check_range(start, length)
    if length > segment_cap:
        raise DomainError(f"len={length} exceeds the segment cap {segment_cap}")
    signs = lambda_values(start, length, workers=workers)
    if prefix_base is None:
        prefix_base = lambda_sum(1, start - 1, workers=workers)
    return LambdaSegment(start, signs, prefix_base)


def sieve_segments(start: int, length: int, count: int, *, workers: int = 1) -> list[LambdaSegment]:
    """Split ``[start, start+length)`` into ``count`` segments sieved independently.

    Segments are computed in parallel; ``prefix_base`` is stitched afterwards in
    ascending order.
    """
    start, length = int(start), int(length)
    _check_range(start, length)
    if count < 1 or count > length:
        raise DomainError(f"cannot split len={length} into {count} segments")
    edges = [start + (length * i) // count for i in range(count + 1)]
    spans = list(zip(edges[:-1], edges[1:]))
    raw = ordered_map(lambda s: lambda_values(s[0], s[1] - s[0]), spans, workers)
    base = lambda_sum(1, start - 1)
    out = []
    for (lo, _), signs in zip(spans, raw):
        out.append(LambdaSegment(lo, signs, base))
        base += int(signs.sum(dtype=np.int64))
    return out


def lambda_prefix(x: int, segment: Optional[LambdaSegment] = None) -> int:
    """L(x) = sum of lambda(n) for n <= x.

    With ``segment`` given, only that coverage is used and anything outside it
    raises :class:`RangeNotMaterializedError`. Without it, ``x`` up to
    ``ON_DEMAND_LIMIT`` is sieved on demand.
    """
    x = int(x)
    if x < 0:
        raise DomainError("x must be >= 0")
    if segment is not None:
        return segment.prefix(x)
    if x > ON_DEMAND_LIMIT:
        raise RangeNotMaterializedError(
            f"L({x}) is beyond the on-demand limit {ON_DEMAND_LIMIT}; materialize a segment first"
        )
    return lambda_sum(1, x)


# --- factorization ---------------------------------------------------------------


@dataclass(frozen=True)
class FactorProfile:
    n: int
    big_omega: int
    distinct_primes: tuple
    exponents: tuple
    largest_prime: int

    @property
    def liouville(self) -> int:
        return -1 if self.big_omega % 2 else 1

    def omega_above(self, h: int) -> int:
        """Number of distinct prime divisors exceeding ``h``."""
        return sum(1 for p in self.distinct_primes if p > h)

    def is_smooth(self, y: int) -> bool:
        return self.largest_prime <= y

    def reconstruct(self) -> int:
        out = 1
        for p, e in zip(self.distinct_primes, self.exponents):
            out *= p**e
        return out


def _profile_from_pairs(n: int, pairs: Sequence[tuple]) -> FactorProfile:
    primes = tuple(p for p, _ in pairs)
    exps = tuple(e for _, e in pairs)
    return FactorProfile(n, sum(exps), primes, exps, primes[-1] if primes else 0)


def factor_profile(n: int) -> FactorProfile:
    """Factor ``n`` by trial division with sieved primes up to sqrt(n)."""
    n = int(n)
    if n < 1:
        raise DomainError(f"factor_profile needs n >= 1, got {n}")
    pairs = []
    m = n
    for p in primes_up_to(min(isqrt(n), _TRIAL_PRIME_LIMIT)):
        p = int(p)
        if p * p > m:
            break
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            pairs.append((p, e))
    else:
        # beyond the sieved primes fall back to odd candidates
        d = _TRIAL_PRIME_LIMIT + 1
        while d * d <= m:
            if m % d == 0:
                e = 0
                while m % d == 0:
                    m //= d
                    e += 1
                pairs.append((d, e))
            d += 2
    if m > 1:
        pairs.append((m, 1))
    return _profile_from_pairs(n, pairs)


def count_big_prime_divisors(n: int, h: int) -> int:
    """omega_{>h}(n): distinct primes q > h dividing n."""
    return factor_profile(n).omega_above(h)


@lru_cache(maxsize=4)
def _spf_cached(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int32 if limit < 2**31 else np.int64)
    for p in primes_up_to(limit)[::-1]:
        spf[p::p] = p
    spf.setflags(write=False)
    return spf


def spf_table(limit: int) -> np.ndarray:
    """Smallest prime factor for ``0..limit`` (entries 0 and 1 are 0)."""
    limit = int(limit)
    if limit > SPF_LIMIT:
        raise DomainError(f"spf table limited to {SPF_LIMIT}; use factor_profile per n")
    return _spf_cached(limit)


def factor_profile_table(n: int, spf: np.ndarray) -> FactorProfile:
    """Factor ``n`` using a smallest-prime-factor table covering it."""
    if n < 1:
        raise DomainError(f"factor_profile needs n >= 1, got {n}")
    pairs = []
    m = n
    while m > 1:
        p = int(spf[m])
        e = 0
        while m % p == 0:
            m //= p
            e += 1
        pairs.append((p, e))
    return _profile_from_pairs(n, pairs)


def big_prime_divisor_counts(limit: int, h: int) -> np.ndarray:
    """omega_{>h}(m) for every ``0 <= m <= limit``."""
    counts = np.zeros(limit + 1, dtype=np.int16)
    for p in primes_in_range(h + 1, limit):
        counts[p::p] += 1
    counts[0] = 0
    return counts


def largest_prime_factor_table(limit: int) -> np.ndarray:
    """Largest prime factor for ``0..limit``; 0 at n = 0 and n = 1."""
    lpf = np.zeros(limit + 1, dtype=np.int64)
    for p in primes_up_to(limit):
        lpf[p::p] = p
    return lpf
