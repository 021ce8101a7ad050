"""Smooth-number counts Psi(x, y), the Dickman rho function and the window threshold H(X)."""

from __future__ import annotations

import math
import warnings
from bisect import bisect_right
from dataclasses import dataclass
from functools import lru_cache
from math import isqrt

import numpy as np

from ._parallel import ordered_map
from .errors import DomainError
from .sieve import BLOCK, primes_up_to

SIEVE_MAX_X = 10**9
DFS_MAX_X = 10**12
DFS_MAX_Y = 10**3
RHO_MAX_U = 50.0
RHO_STEP = 1e-3


# --- exact counts ----------------------------------------------------------------------


def _smooth_mask_block(lo: int, hi: int, y: int, primes: np.ndarray) -> np.ndarray:
    """Mask of y-smooth n in [lo, hi), dividing out primes <= min(y, sqrt(hi-1)).

    The surviving cofactor is 1 or a single prime, so n is y-smooth iff it is <= y.
    """
    rem = np.arange(lo, hi, dtype=np.int64)
    top = hi - 1
    size = hi - lo
    for p in primes:
        p = int(p)
        pk = p
        while pk <= top:
            first = (-lo) % pk
            if first < size:
                rem[first::pk] //= p
            pk *= p
    return rem <= y


def _smooth_count_block(lo: int, hi: int, y: int, primes: np.ndarray) -> int:
    return int(np.count_nonzero(_smooth_mask_block(lo, hi, y, primes)))


def psi_sieve(x: int, y: int, *, workers: int = 1) -> int:
    """Psi(x, y) by a segmented sieve over [1, x]."""
    if x < 1:
        return 0
    if y >= x:
        return x
    primes = primes_up_to(min(y, isqrt(x)))
    spans = [(lo, min(lo + BLOCK, x + 1)) for lo in range(1, x + 1, BLOCK)]
    counts = ordered_map(lambda s: _smooth_count_block(s[0], s[1], y, primes), spans, workers)
    return sum(counts)


def psi_dfs(x: int, y: int) -> int:
    """Psi(x, y) by depth-first enumeration of products of primes <= y.

    Each smooth n is generated once as a non-decreasing prime sequence. Once
    ``p*p > x`` every remaining prime up to ``x`` contributes exactly one
    number, which is counted by bisection instead of being visited.
    """
    if x < 1:
        return 0
    primes = [int(p) for p in primes_up_to(min(y, x))]

    @lru_cache(maxsize=None)
    def count(bound: int, j: int) -> int:
        total = 1
        for i in range(j, len(primes)):
            p = primes[i]
            if p > bound:
                break
            if p * p > bound:
                total += bisect_right(primes, bound) - i
                break
            total += count(bound // p, i)
        return total

    out = count(x, 0)
    count.cache_clear()
    return out


def smooth_numbers_dfs(x: int, y: int) -> np.ndarray:
    """Sorted array of every y-smooth n <= x, enumerated depth-first."""
    primes = [int(p) for p in primes_up_to(min(y, x))] if x >= 2 else []
    out = []
    stack = [(1, 0)]
    while stack:
        n, j = stack.pop()
        out.append(n)
        for i in range(j, len(primes)):
            m = n * primes[i]
            if m > x:
                break
            stack.append((m, i))
    return np.sort(np.array(out, dtype=np.int64)) if x >= 1 else np.zeros(0, dtype=np.int64)


def psi_table(x_max: int, y: int, method: str = "sieve") -> np.ndarray:
    """Psi(x, y) for every 0 <= x <= x_max at once (index x).

    ``"sieve"`` accumulates the smoothness mask; ``"dfs"`` counts the
    enumerated smooth numbers below each x.
    """
    x_max, y = int(x_max), int(y)
    if x_max < 0 or y < 1:
        raise DomainError("psi_table needs x_max >= 0 and y >= 1")
    if x_max > SIEVE_MAX_X // 10:
        raise DomainError(f"psi_table limited to x_max <= {SIEVE_MAX_X // 10}")
    table = np.zeros(x_max + 1, dtype=np.int64)
    if x_max == 0:
        return table
    if method == "sieve":
        primes = primes_up_to(min(y, isqrt(x_max)))
        mask = np.concatenate(
            [_smooth_mask_block(lo, min(lo + BLOCK, x_max + 1), y, primes) for lo in range(1, x_max + 1, BLOCK)]
        )
        table[1:] = np.cumsum(mask)
    elif method == "dfs":
        smooth = smooth_numbers_dfs(x_max, y)
        table[:] = np.searchsorted(smooth, np.arange(x_max + 1), side="right")
    else:
        raise DomainError(f"unknown method {method!r}")
    return table


def psi_exact(x: int, y: int, method: str = "auto", *, workers: int = 1) -> int:
    """Exact number of n <= x whose prime factors are all <= y (n = 1 counts).

    ``method`` is ``"sieve"`` (x <= 1e9), ``"dfs"`` (x <= 1e12 and y <= 1e3)
    or ``"auto"``.
    """
    x, y = int(x), int(y)
    if x < 1 or y < 1:
        raise DomainError("psi_exact needs x >= 1 and y >= 1")
    sieve_ok = x <= SIEVE_MAX_X
    dfs_ok = x <= DFS_MAX_X and y <= DFS_MAX_Y
    if method == "auto":
        if y == 1:
            return 1
        if y >= x:
            return x
        method = "sieve" if sieve_ok else "dfs" if dfs_ok else None
        if method is None:
            raise DomainError(
                f"psi_exact({x}, {y}) out of range: sieve needs x <= {SIEVE_MAX_X}, "
                f"dfs needs x <= {DFS_MAX_X} and y <= {DFS_MAX_Y}"
            )
    if method == "sieve":
        if not sieve_ok:
            raise DomainError(f"sieve method needs x <= {SIEVE_MAX_X}; try method='dfs' (y <= {DFS_MAX_Y})")
        return psi_sieve(x, y, workers=workers)
    if method == "dfs":
        if not dfs_ok:
            raise DomainError(f"dfs method needs x <= {DFS_MAX_X} and y <= {DFS_MAX_Y}; try method='sieve'")
        return psi_dfs(x, y)
    raise DomainError(f"unknown method {method!r}")


# --- Dickman rho ------------------------------------------------------------------------


def _march_rho(step: float, u_max: float) -> np.ndarray:
    """rho on the grid k*step from u*rho(u) = integral of rho over [u-1, u], trapezoid rule.

    The trapezoid rule makes the unknown rho(u) appear on both sides:
    rho_k (u_k - step/2) = step * (rho_{k-N}/2 + sum_{k-N<j<k} rho_j), N = 1/step.
    """
    N = int(round(1.0 / step))
    K = int(round(u_max / step))
    rho = np.ones(K + 1)
    for k in range(N + 1, K + 1):
        inner = rho[k - N + 1 : k].sum()
        rho[k] = step * (0.5 * rho[k - N] + inner) / (k * step - 0.5 * step)
    return rho


@lru_cache(maxsize=4)
def rho_table(step: float = RHO_STEP, u_max: float = RHO_MAX_U) -> np.ndarray:
    """Richardson-extrapolated rho on the grid ``k*step``.

    Grids at ``step`` and ``step/2`` are marched and combined as
    ``(4*fine - coarse)/3``; both grids contain every integer, where rho loses
    smoothness, so the error expansion in step**2 holds on each unit interval.
    """
    coarse = _march_rho(step, u_max)
    fine = _march_rho(step / 2, u_max)[::2]
    table = (4.0 * fine - coarse) / 3.0
    table.setflags(write=False)
    return table


def dickman_rho(u: float, *, step: float = RHO_STEP) -> float:
    """Dickman's rho(u) for 0 <= u <= 50."""
    u = float(u)
    if u < 0 or math.isnan(u):
        raise DomainError(f"dickman_rho needs u >= 0, got {u}")
    if u > RHO_MAX_U:
        raise DomainError(f"dickman_rho limited to u <= {RHO_MAX_U} (underflow guard)")
    if u <= 1.0:
        return 1.0
    if u <= 2.0:
        return 1.0 - math.log(u)
    table = rho_table(step)
    pos = u / step
    k = int(round(pos))
    if abs(pos - k) < 1e-9:
        return float(table[k])
    # 4-point Lagrange stencil kept inside the unit interval containing u
    N = int(round(1.0 / step))
    left = int(math.floor(u)) * N
    i0 = min(max(int(math.floor(pos)) - 1, left), left + N - 3)
    xs = (np.arange(i0, i0 + 4) * step)
    ys = table[i0 : i0 + 4]
    total = 0.0
    for a in range(4):
        w = 1.0
        for b in range(4):
            if a != b:
                w *= (u - xs[b]) / (xs[a] - xs[b])
        total += w * ys[a]
    return float(total)


# --- records ----------------------------------------------------------------------------


@dataclass(frozen=True)
class SmoothCountRecord:
    x: int
    y: int
    psi_exact: int
    u: float
    rho_estimate: float
    u_pow_estimate: float
    ratios: tuple

    CSV_COLUMNS = ("x", "y", "u", "psi_exact", "rho_estimate", "u_pow_estimate", "ratio_rho", "ratio_upow")

    def row(self) -> dict:
        return {
            "x": self.x,
            "y": self.y,
            "u": self.u,
            "psi_exact": self.psi_exact,
            "rho_estimate": self.rho_estimate,
            "u_pow_estimate": self.u_pow_estimate,
            "ratio_rho": self.ratios[0],
            "ratio_upow": self.ratios[1],
        }


def psi_estimate(x: int, y: int, method: str = "auto", *, workers: int = 1) -> SmoothCountRecord:
    """Exact Psi(x, y) alongside x*rho(u) and x*u**(-u), u = log x / log y."""
    if y < 2:
        raise DomainError("psi_estimate needs y >= 2 so that u is finite")
    exact = psi_exact(x, y, method, workers=workers)
    u = math.log(x) / math.log(y)
    rho_est = x * dickman_rho(u)
    upow_est = x * u ** (-u) if u > 0 else float(x)
    ratios = (
        exact / rho_est if rho_est > 0 else math.inf,
        exact / upow_est if upow_est > 0 else math.inf,
    )
    return SmoothCountRecord(x, y, exact, u, rho_est, upow_est, ratios)


def threshold_H(X: float, c: float = 0.5) -> float:
    """H_c(X) = exp(sqrt(c * log X * log log X))."""
    if X < 16:
        raise DomainError(f"threshold_H needs X >= 16, got {X}")
    if not 0 < c <= 1:
        raise DomainError(f"threshold_H needs 0 < c <= 1, got {c}")
    L = math.log(X)
    return math.exp(math.sqrt(c * L * math.log(L)))


@dataclass(frozen=True)
class DensityReport:
    X: int
    h: int
    psi: int
    density: float
    H: float
    in_range: bool

    CSV_COLUMNS = ("X", "h", "psi", "density", "H", "in_range")

    def row(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_COLUMNS}


def smooth_density_check(X: int, h: int, *, c: float = 0.5, workers: int = 1) -> DensityReport:
    """density = Psi(4X, h) * h / (4X); warns when h exceeds H_c(X)."""
    X, h = int(X), int(h)
    if X < 1 or h < 1:
        raise DomainError("smooth_density_check needs X >= 1 and h >= 1")
    psi = psi_exact(4 * X, h, workers=workers)
    H = threshold_H(X, c) if X >= 16 else math.nan
    in_range = bool(h <= H) and h < 4 * X
    if not in_range:
        warnings.warn(f"h={h} is outside the smooth-number range (H={H:.6g}, 4X={4 * X})", stacklevel=2)
    return DensityReport(X, h, psi, psi * h / (4 * X), H, in_range)
