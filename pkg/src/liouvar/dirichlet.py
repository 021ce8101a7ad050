"""Dirichlet polynomials F(t) = sum a_n n^(-sigma-it): evaluation, mean squares, scans.

Two evaluation paths exist on purpose. :func:`evaluate` computes every phase
directly. Long uniform sweeps (:func:`sample_grid`, used by the quadratures)
write ``t = t_j + k*dt`` and factor ``n^(-i t)`` into a per-block phase times a
fixed ``n^(-i k dt)`` table, so a whole sweep becomes one matrix product.
Phases are always reduced mod 2*pi before trig calls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from ._parallel import ordered_map
from .errors import ConfigurationError, DegenerateInputError, DomainError, UndersampledError
from .sieve import lambda_values, primes_in_range
from .variance import FullGrid, variance

TWO_PI = 2.0 * math.pi
MVT_CONSTANT = 10.0
_BLOCK = 128
_EVAL_CHUNK = 1 << 22


@dataclass(frozen=True)
class DirichletPolynomial:
    """Real coefficients ``a_n`` for ``n_start <= n <= n_end``."""

    n_start: int
    coefficients: np.ndarray = field(repr=False)

    def __post_init__(self):
        coeffs = np.asarray(self.coefficients, dtype=np.float64).copy()
        if self.n_start < 1:
            raise DomainError("n_start must be >= 1")
        if coeffs.ndim != 1 or coeffs.size == 0:
            raise DomainError("coefficients must be a non-empty 1-d array")
        coeffs.setflags(write=False)
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def n_end(self) -> int:
        return self.n_start + self.coefficients.size - 1

    def __len__(self) -> int:
        return self.coefficients.size

    @classmethod
    def liouville(cls, lo: int, hi: int, source: Optional[Callable] = None) -> "DirichletPolynomial":
        vals = source(lo, hi - lo + 1) if source is not None else lambda_values(lo, hi - lo + 1)
        return cls(lo, np.asarray(vals, dtype=np.float64))

    @classmethod
    def prime_indicator(cls, lo: int, hi: int) -> "DirichletPolynomial":
        coeffs = np.zeros(hi - lo + 1)
        coeffs[primes_in_range(lo, hi) - lo] = 1.0
        return cls(lo, coeffs)

    def support(self, sigma: float) -> tuple:
        """(log n, a_n * n^-sigma) restricted to nonzero coefficients."""
        idx = np.flatnonzero(self.coefficients)
        n = (self.n_start + idx).astype(np.float64)
        logs = np.log(n)
        return logs, self.coefficients[idx] * np.exp(-sigma * logs)

    def diagonal(self, sigma: float) -> float:
        """sum |a_n|^2 n^(-2 sigma)."""
        _, c = self.support(sigma)
        return float(np.dot(c, c))

    def max_log_width(self) -> float:
        return math.log(self.n_end) if self.n_end > 1 else 0.0


def _phases(t: np.ndarray, logs: np.ndarray) -> np.ndarray:
    return np.exp(-1j * np.mod(np.multiply.outer(t, logs), TWO_PI))


def evaluate(poly: DirichletPolynomial, sigma: float, t):
    """F(t) = sum a_n n^-sigma (cos(t log n) - i sin(t log n)), scalar or array ``t``."""
    logs, c = poly.support(sigma)
    ts = np.atleast_1d(np.asarray(t, dtype=np.float64))
    out = np.empty(ts.size, dtype=np.complex128)
    if logs.size == 0:
        out[:] = 0.0
    else:
        rows = max(1, _EVAL_CHUNK // logs.size)
        for i in range(0, ts.size, rows):
            out[i : i + rows] = _phases(ts[i : i + rows], logs) @ c
    return complex(out[0]) if np.ndim(t) == 0 else out.reshape(np.shape(t))


def sample_grid(poly: DirichletPolynomial, sigma: float, t0: float, dt: float, count: int, *, workers: int = 1):
    """Yield F(t0 + k*dt), k = 0..count-1, as consecutive complex chunks."""
    logs, c = poly.support(sigma)
    if logs.size == 0:
        for i in range(0, count, 1 << 16):
            yield np.zeros(min(1 << 16, count - i), dtype=np.complex128)
        return
    step_table = _phases(np.arange(_BLOCK) * dt, logs)  # (B, N)
    per_batch = int(min(1024, max(1, 2_000_000 // logs.size)))
    nblocks = -(-count // _BLOCK)
    batches = [(b, min(b + per_batch, nblocks)) for b in range(0, nblocks, per_batch)]

    def work(span):
        lo, hi = span
        starts = t0 + np.arange(lo, hi) * (_BLOCK * dt)
        Z = _phases(starts, logs) * c  # (blocks, N)
        F = Z @ step_table.T  # (blocks, B): F[j, k] = F(starts_j + k dt)
        flat = F.reshape(-1)
        return flat[: min(flat.size, count - lo * _BLOCK)]

    # bounded lookahead keeps memory flat while preserving order
    group = max(1, workers)
    for g in range(0, len(batches), group):
        for chunk in ordered_map(work, batches[g : g + group], workers):
            yield chunk


def _simpson_intervals(T1: float, T2: float, step: float) -> int:
    if not math.isfinite(step):
        return 2
    m = max(2, math.ceil((T2 - T1) / step - 1e-12))
    return m + (m % 2)


def simpson_abs2(poly: DirichletPolynomial, sigma: float, T1: float, T2: float, step: float, *, workers: int = 1) -> float:
    """Composite Simpson estimate of the integral of |F(t)|^2 over [T1, T2]."""
    m = _simpson_intervals(T1, T2, step)
    dt = (T2 - T1) / m
    total = 0.0
    pos = 0
    for chunk in sample_grid(poly, sigma, T1, dt, m + 1, workers=workers):
        k = np.arange(pos, pos + chunk.size)
        w = np.where(k % 2 == 1, 4.0, 2.0)
        w[(k == 0) | (k == m)] = 1.0
        total += float(np.dot(w, chunk.real**2 + chunk.imag**2))
        pos += chunk.size
    return total * dt / 3.0


def default_step(poly: DirichletPolynomial) -> float:
    width = poly.max_log_width()
    return 0.4 / width if width > 0 else math.inf


def check_step(poly: DirichletPolynomial, step: float) -> None:
    width = poly.max_log_width()
    if not step > 0:
        raise DomainError("step must be positive")
    if width > 0 and step > 0.5 / width:
        raise UndersampledError(
            f"undersampled oscillation: step={step} > 0.5/log({poly.n_end})={0.5 / width:.6g}"
        )


@dataclass(frozen=True)
class MeanSquareReport:
    T1: float
    T2: float
    step: float
    integral: float
    diagonal: float
    ratio: float

    CSV_COLUMNS = ("T1", "T2", "step", "integral", "diagonal", "ratio")

    def row(self) -> dict:
        return {f: getattr(self, f) for f in self.CSV_COLUMNS}


def mean_square(
    poly: DirichletPolynomial,
    sigma: float,
    T1: float,
    T2: float,
    step: Optional[float] = None,
    *,
    workers: int = 1,
) -> MeanSquareReport:
    """Simpson estimate of the mean square over [T1, T2] against the diagonal term."""
    if not T1 < T2:
        raise DomainError(f"need T1 < T2, got [{T1}, {T2}]")
    step = default_step(poly) if step is None else float(step)
    check_step(poly, step)
    integral = simpson_abs2(poly, sigma, T1, T2, step, workers=workers)
    diag = (T2 - T1) * poly.diagonal(sigma)
    ratio = integral / diag if diag > 0 else math.nan
    return MeanSquareReport(float(T1), float(T2), step, integral, diag, ratio)


def mvt_check(poly: DirichletPolynomial, T: float, sigma: float = 0.0, step: Optional[float] = None, *, workers: int = 1) -> float:
    """r = (integral of |F|^2 over [0, T]) / (T * sum |a_n|^2 n^(-2 sigma))."""
    if poly.diagonal(sigma) == 0:
        raise DegenerateInputError("zero polynomial has no mean-value ratio")
    return mean_square(poly, sigma, 0.0, T, step, workers=workers).ratio


def mvt_envelope(N: int, T: float, C: float = MVT_CONSTANT) -> float:
    """Empirical bound C*N/T on |r - 1|."""
    return C * N / T


# --- pointwise scans ----------------------------------------------------------------------


@dataclass
class PrimeSumReport:
    P: int
    X: int
    upper: int
    t: np.ndarray
    values: np.ndarray
    ratios: np.ndarray
    max_ratio: float
    empty: bool
    num_primes: int

    CSV_COLUMNS = ("P", "X", "t", "re", "im", "ratio")

    def rows(self) -> list:
        return [
            {"P": self.P, "X": self.X, "t": float(t), "re": v.real, "im": v.imag, "ratio": float(r)}
            for t, v, r in zip(self.t, self.values, self.ratios)
        ]


def geometric_t_grid(X: int, points: int = 64) -> np.ndarray:
    return np.geomspace(math.sqrt(X), X, points)


def prime_sum_scan(P: int, X: int, t_samples: Optional[Sequence[float]] = None, *, upper: Optional[int] = None, points: int = 64) -> PrimeSumReport:
    """|sum over primes P <= p <= upper of p^(-1/2 - 1/log X - it)| / log X per sample.

    ``upper`` defaults to 2P; a narrower slice is allowed for degenerate checks.
    Samples must satisfy sqrt(X) <= |t| <= X.
    """
    P, X = int(P), int(X)
    upper = 2 * P if upper is None else int(upper)
    if X < 2:
        raise DomainError("X must be >= 2")
    if P > X:
        raise DomainError(f"P={P} exceeds X={X}")
    t = geometric_t_grid(X, points) if t_samples is None else np.asarray(t_samples, dtype=np.float64)
    if t.size == 0:
        raise ConfigurationError("no t samples")
    at = np.abs(t)
    if np.any(at < math.sqrt(X) * (1 - 1e-12)) or np.any(at > X * (1 + 1e-12)):
        raise DomainError("t samples must satisfy sqrt(X) <= |t| <= X")
    logX = math.log(X)
    primes = primes_in_range(P, upper)
    if primes.size == 0:
        zeros = np.zeros(t.size)
        return PrimeSumReport(P, X, upper, t, zeros.astype(complex), zeros, 0.0, True, 0)
    poly = DirichletPolynomial.prime_indicator(P, upper)
    values = np.atleast_1d(evaluate(poly, 0.5 + 1.0 / logX, t))
    ratios = np.abs(values) / logX
    return PrimeSumReport(P, X, upper, t, values, ratios, float(ratios.max()), False, int(primes.size))


@dataclass
class LambdaScanReport:
    X: int
    t_grid: np.ndarray
    abs_values: np.ndarray
    max_abs: float
    argmax_t: float
    ladder: list = field(default_factory=list)  # (X', max |F|) pairs
    slope: float = math.nan

    CSV_COLUMNS = ("X", "max_abs", "argmax_t")


def lambda_poly_scan(
    X: int,
    t_grid: Sequence[float],
    *,
    ladder: Optional[Sequence[int]] = None,
    coefficient_source: Optional[Callable] = None,
) -> LambdaScanReport:
    """max over the grid of |sum_{X<=n<=2X} a_n n^(-1/2-it)|, plus a log-log slope over ``ladder``."""
    t = np.asarray(t_grid, dtype=np.float64)
    if t.size == 0:
        raise ConfigurationError("t_grid is empty")

    def scan(x):
        poly = DirichletPolynomial.liouville(x, 2 * x, coefficient_source)
        a = np.abs(np.atleast_1d(evaluate(poly, 0.5, t)))
        i = int(np.argmax(a))
        return a, float(a[i]), float(t[i])

    a, m, arg = scan(int(X))
    report = LambdaScanReport(int(X), t, a, m, arg)
    if ladder:
        report.ladder = [(int(x), scan(int(x))[1]) for x in ladder]
        xs = np.array([x for x, _ in report.ladder], dtype=float)
        ms = np.array([v for _, v in report.ladder])
        if len(xs) >= 2 and np.all(ms > 0):
            report.slope = float(np.polyfit(np.log(xs), np.log(ms), 1)[0])
    return report


# --- truncated Perron integral ------------------------------------------------------------


@dataclass(frozen=True)
class PerronRecord:
    y: float
    kappa: float
    T: float
    step: float
    value: complex
    indicator: float
    error: float
    bound: float

    CSV_COLUMNS = ("y", "kappa", "T", "re", "im", "indicator", "error", "bound")

    def row(self) -> dict:
        return {
            "y": self.y,
            "kappa": self.kappa,
            "T": self.T,
            "re": self.value.real,
            "im": self.value.imag,
            "indicator": self.indicator,
            "error": self.error,
            "bound": self.bound,
        }


def perron_step_cap(y: float) -> float:
    return 0.1 if y == 1 else min(0.1, 0.1 / abs(math.log(y)))


def perron_default_step(y: float, kappa: float) -> float:
    # the integrand has a peak of width kappa at tau = 0
    return min(perron_step_cap(y), kappa / 128.0)


def perron_truncated(y: float, kappa: float, T: float, step: Optional[float] = None) -> PerronRecord:
    """(1/2pi) * integral over tau in [-T, T] of y^(kappa+i tau)/(kappa+i tau), by Simpson."""
    if not (y > 0 and kappa > 0 and T > 0):
        raise DomainError("perron_truncated needs y > 0, kappa > 0, T > 0")
    step = perron_default_step(y, kappa) if step is None else float(step)
    if not step > 0:
        raise DomainError("step must be positive")
    if step > perron_step_cap(y) * (1 + 1e-12):
        raise UndersampledError(f"step={step} exceeds cap {perron_step_cap(y):.6g} for y={y}")
    m = _simpson_intervals(-T, T, step)
    dt = 2.0 * T / m
    logy = math.log(y)
    ykap = y**kappa
    total = 0j
    chunk = 1 << 20
    for lo in range(0, m + 1, chunk):
        k = np.arange(lo, min(lo + chunk, m + 1))
        tau = -T + k * dt
        f = ykap * np.exp(1j * np.mod(tau * logy, TWO_PI)) / (kappa + 1j * tau)
        w = np.where(k % 2 == 1, 4.0, 2.0)
        w[(k == 0) | (k == m)] = 1.0
        total += complex(np.dot(w, f))
    value = total * dt / 3.0 / TWO_PI
    indicator = 1.0 if y > 1 else 0.5 if y == 1 else 0.0
    bound = ykap / max(1.0, T * abs(logy))
    return PerronRecord(float(y), float(kappa), float(T), step, value, indicator, abs(value - indicator), bound)


# --- Plancherel comparison ----------------------------------------------------------------

PLANCHEREL_MAX_X = 10**6


@dataclass
class PlancherelReport:
    X: int
    h: int
    T_cap: float
    lhs: float
    rhs_low: float
    rhs_high: float
    ladder: list  # (T, (1/(hT)) * integral over [T, 2T])
    note: str = "max over T > X/h approximated by a finite dyadic ladder"

    @property
    def ratio(self) -> float:
        denom = self.rhs_low + self.rhs_high
        return self.lhs / denom if denom > 0 else math.nan

    CSV_COLUMNS = ("X", "h", "T_cap", "lhs", "rhs_low", "rhs_high", "ratio", "ladder_top")

    def row(self) -> dict:
        return {
            "X": self.X,
            "h": self.h,
            "T_cap": self.T_cap,
            "lhs": self.lhs,
            "rhs_low": self.rhs_low,
            "rhs_high": self.rhs_high,
            "ratio": self.ratio,
            "ladder_top": self.ladder[-1][0] if self.ladder else math.nan,
        }


def dyadic_ladder(T0: float, T_cap: float) -> list:
    out = [T0]
    while out[-1] * 2 <= T_cap * (1 + 1e-12):
        out.append(out[-1] * 2)
    return out


def plancherel_compare(
    X: int,
    h: int,
    T_cap: Optional[float] = None,
    *,
    signs_source: Optional[Callable] = None,
    step: Optional[float] = None,
    workers: int = 1,
) -> PlancherelReport:
    """Both sides of the short-interval to mean-square reduction at one (X, h).

    lhs is the mean over x in [X, 2X-1] of (S(x,h)/h)^2. The Dirichlet
    polynomial runs over [X, 4X] at sigma = 1/2 with the same coefficients.
    ``T_cap`` defaults to X.
    """
    X, h = int(X), int(h)
    if X > PLANCHEREL_MAX_X:
        raise DomainError(f"plancherel_compare limited to X <= {PLANCHEREL_MAX_X}")
    if not 1 <= h <= X:
        raise DomainError(f"need 1 <= h <= X, got h={h}, X={X}")
    T_cap = float(X) if T_cap is None else float(T_cap)

    rep = variance(X, h, FullGrid(), signs_source, workers=workers)
    lhs = rep.sum_squares / (rep.num_samples * h * h)

    poly = DirichletPolynomial.liouville(X, 4 * X, signs_source)
    step = default_step(poly) if step is None else step
    check_step(poly, step)
    T0 = X / h
    rhs_low = simpson_abs2(poly, 0.5, 0.0, T0, step, workers=workers) / X
    ladder = []
    for T in dyadic_ladder(T0, T_cap):
        val = simpson_abs2(poly, 0.5, T, 2 * T, step, workers=workers) / (h * T)
        ladder.append((T, val))
    rhs_high = max(v for _, v in ladder)
    return PlancherelReport(X, h, T_cap, lhs, rhs_low, rhs_high, ladder)
