"""Short-interval sums of lambda and their empirical variance.

Windows are half-open: ``S(x, h) = L(x + h) - L(x)`` sums lambda(n) over
``x < n <= x + h``. The variance ``V(X, h)`` is the mean of ``S(x, h)**2`` over
integer ``x`` in ``[X, 2X - 1]`` (or a sample of them).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np

from ._parallel import ordered_map
from .errors import ConfigurationError, DomainError, HScanError, RangeNotMaterializedError
from .sieve import lambda_values

SignSource = Callable[[int, int], np.ndarray]


# --- sign sources ------------------------------------------------------------------


class LiouvilleSource:
    """Default sign source: sieve lambda on demand, optionally through a segment cache.

    With a cache, values are fetched in aligned chunks of ``chunk`` integers,
    each persisted as one ``.liou`` file.
    """

    def __init__(self, workers: int = 1, cache=None, chunk: int = 2**24):
        self.workers = workers
        self.cache = cache
        self.chunk = chunk

    def __call__(self, start: int, length: int) -> np.ndarray:
        if self.cache is None:
            return lambda_values(start, length, workers=self.workers)
        stop = start + length  # exclusive
        first = (start - 1) // self.chunk
        last = (stop - 2) // self.chunk
        parts = []
        for k in range(first, last + 1):
            seg = self.cache.get(k * self.chunk + 1, self.chunk, workers=self.workers)
            lo = max(start, seg.start) - seg.start
            hi = min(stop, seg.stop + 1) - seg.start
            parts.append(np.asarray(seg.signs[lo:hi]))
        return np.concatenate(parts)


class ArraySource:
    """Serve values from a materialized array; ``values[i]`` belongs to ``start + i``."""

    def __init__(self, start: int, values: np.ndarray):
        self.start = int(start)
        self.values = np.asarray(values)

    def __call__(self, start: int, length: int) -> np.ndarray:
        lo = start - self.start
        if lo < 0 or lo + length > self.values.size:
            raise RangeNotMaterializedError(
                f"[{start}, {start + length - 1}] not inside "
                f"[{self.start}, {self.start + self.values.size - 1}]"
            )
        return self.values[lo : lo + length]


def function_source(fn: Callable[[np.ndarray], np.ndarray]) -> SignSource:
    """Wrap a vectorized ``n -> a(n)`` as a sign source (test hook)."""

    def source(start: int, length: int) -> np.ndarray:
        return np.asarray(fn(np.arange(start, start + length, dtype=np.int64)), dtype=np.int64)

    return source


# --- sampling policies ---------------------------------------------------------------


@dataclass(frozen=True)
class FullGrid:
    def describe(self) -> str:
        return "full-grid"


@dataclass(frozen=True)
class Strided:
    k: int

    def __post_init__(self):
        if self.k < 1:
            raise ConfigurationError("stride must be >= 1")

    def describe(self) -> str:
        return f"strided({self.k})"


@dataclass(frozen=True)
class RandomSample:
    count: int
    seed: Optional[int] = None

    def __post_init__(self):
        if self.seed is None:
            raise ConfigurationError("random sampling policy requires a seed")
        if self.count < 1:
            raise ConfigurationError("random sampling needs count >= 1")

    def describe(self) -> str:
        return f"random({self.count},{self.seed})"


Policy = Union[FullGrid, Strided, RandomSample]


# --- reports ---------------------------------------------------------------------------


def _log6(X: int) -> float:
    return math.log(X) ** 6


@dataclass(frozen=True)
class VarianceReport:
    X: int
    h: int
    sample_policy: Policy
    num_samples: int
    sum_squares: int
    V: float = field(init=False)
    normalized: dict = field(init=False)

    def __post_init__(self):
        V = self.sum_squares / self.num_samples
        object.__setattr__(self, "V", V)
        if self.h == 0:
            norm = {k: math.nan for k in ("V/h", "V/h^2", "V/(h*log^6 X)")}
        else:
            norm = {
                "V/h": V / self.h,
                "V/h^2": V / self.h**2,
                "V/(h*log^6 X)": V / (self.h * _log6(self.X)) if self.X > 1 else math.nan,
            }
        object.__setattr__(self, "normalized", norm)

    @property
    def exact(self) -> Fraction:
        return Fraction(self.sum_squares, self.num_samples)

    CSV_COLUMNS = ("X", "h", "num_samples", "V", "V_over_h", "V_over_h2", "V_over_h_log6")

    def row(self) -> dict:
        return {
            "X": self.X,
            "h": self.h,
            "num_samples": self.num_samples,
            "V": self.V,
            "V_over_h": self.normalized["V/h"],
            "V_over_h2": self.normalized["V/h^2"],
            "V_over_h_log6": self.normalized["V/(h*log^6 X)"],
        }


# --- operations -----------------------------------------------------------------------


def window_sum(x: int, h: int, signs_source: Optional[SignSource] = None) -> int:
    """S(x, h) = sum of a(n) for x < n <= x + h."""
    if x < 0 or h < 0:
        raise DomainError("window_sum needs x >= 0 and h >= 0")
    if h == 0:
        return 0
    source = signs_source or LiouvilleSource()
    return int(np.sum(source(x + 1, h), dtype=np.int64))


def _window_sums(vals: np.ndarray, h: int, count: int) -> np.ndarray:
    """Sliding sums of ``h`` consecutive entries, ``count`` of them.

    S(x+1) = S(x) + a(x+h+1) - a(x+1), vectorized as a cumulative sum.
    """
    vals = vals.astype(np.int64, copy=False)
    s0 = int(vals[:h].sum())
    out = np.empty(count, dtype=np.int64)
    out[0] = s0
    if count > 1:
        np.cumsum(vals[h : h + count - 1] - vals[: count - 1], out=out[1:])
        out[1:] += s0
    return out


def _block_size(h: int) -> int:
    # keeps each block's int64 sum of squares below 2**62
    return int(max(1, min(2**20, (2**62) // max(1, h * h))))


def _sum_squares_grid(vals: np.ndarray, h: int, X: int, stride: int, workers: int) -> tuple:
    """(sum of S**2, sample count) over x = X, X+stride, ... <= 2X-1.

    ``vals[i]`` is a(X + 1 + i). Blocks are reduced in ascending order with
    Python integers, so the result is exact and independent of ``workers``.
    """
    blk = _block_size(h)
    blk -= blk % stride
    blk = max(blk, stride)
    starts = list(range(0, X, blk))

    def work(lo: int):
        hi = min(lo + blk, X)
        S = _window_sums(vals[lo : hi + h - 1], h, hi - lo)
        if stride > 1:
            S = S[::stride]
        return int(np.dot(S, S)), int(S.size)

    parts = ordered_map(work, starts, workers)
    return sum(p[0] for p in parts), sum(p[1] for p in parts)


def variance(
    X: int,
    h: int,
    policy: Optional[Policy] = None,
    signs_source: Optional[SignSource] = None,
    *,
    workers: int = 1,
) -> VarianceReport:
    """Empirical V(X, h): mean of S(x, h)**2 over sampled integer x in [X, 2X-1].

    ``signs_source(start, length)`` returns a(n) for ``start <= n < start+length``;
    it defaults to the Liouville sieve and may be any integer sequence.
    """
    X, h = int(X), int(h)
    policy = policy if policy is not None else FullGrid()
    if X < 1:
        raise DomainError("X must be >= 1")
    if h < 0:
        raise DomainError("h must be >= 0")
    if h > X:
        raise DomainError(f"h={h} exceeds X={X}")
    if h == 0:
        n = policy.count if isinstance(policy, RandomSample) else _grid_count(X, policy)
        return VarianceReport(X, 0, policy, n, 0)

    source = signs_source or LiouvilleSource(workers=workers)
    vals = np.asarray(source(X + 1, X + h - 1))

    if isinstance(policy, RandomSample):
        rng = np.random.default_rng(policy.seed)
        xs = rng.integers(X, 2 * X, size=policy.count)
        prefix = np.concatenate(([0], np.cumsum(vals, dtype=np.int64)))
        # prefix[i] = sum of a(X+1 .. X+i)
        S = prefix[xs - X + h] - prefix[xs - X]
        blk = _block_size(h)
        total = sum(int(np.dot(S[i : i + blk], S[i : i + blk])) for i in range(0, S.size, blk))
        n = int(S.size)
    else:
        stride = policy.k if isinstance(policy, Strided) else 1
        total, n = _sum_squares_grid(vals, h, X, stride, workers)

    report = VarianceReport(X, h, policy, n, total)
    if vals.size and np.max(np.abs(vals)) <= 1 and report.sum_squares > h * h * n:
        raise AssertionError(f"V={report.V} exceeds h^2={h * h}")
    return report


def _grid_count(X: int, policy: Policy) -> int:
    if isinstance(policy, Strided):
        return len(range(X, 2 * X, policy.k))
    return X


def h_scan(
    X: int,
    h_values: Sequence[int],
    policy: Optional[Policy] = None,
    signs_source: Optional[SignSource] = None,
    *,
    workers: int = 1,
) -> list[VarianceReport]:
    """One VarianceReport per h, in the given (ascending) order.

    Values are fetched once for the largest admissible h and shared. If an
    entry fails, :class:`HScanError` is raised carrying the reports so far.
    """
    h_values = [int(h) for h in h_values]
    if not h_values:
        raise ConfigurationError("h_values is empty")
    if any(b < a for a, b in zip(h_values, h_values[1:])):
        raise ConfigurationError("h_values must be ascending")
    ok = [h for h in h_values if 0 < h <= X]
    source = signs_source
    if ok and X >= 1:
        base = signs_source or LiouvilleSource(workers=workers)
        source = ArraySource(X + 1, np.asarray(base(X + 1, X + max(ok) - 1)))
    reports = []
    for h in h_values:
        try:
            reports.append(variance(X, h, policy, source, workers=workers))
        except Exception as exc:
            raise HScanError(f"h-scan aborted at h={h}: {exc}", reports, exc) from exc
    return reports


def predicted_bound(X: int, h: int, C: float = 1.0, c: float = 0.5) -> float:
    """C * h**2 * (log X)**6 * (1/h + 1/H_c(X))."""
    from .smooth import threshold_H

    if h < 1:
        raise DomainError("h must be >= 1")
    if C < 0:
        raise DomainError("C must be >= 0")
    H = threshold_H(X, c)
    return C * h * h * _log6(X) * (1.0 / h + 1.0 / H)
