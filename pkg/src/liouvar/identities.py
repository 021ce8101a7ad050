"""Exact checks of the rough-integer decomposition of sum lambda(n) over [X, 4X].

Every n with a prime factor p > h is written as n = p*m in
``omega_{>h}(m) + [p does not divide m]`` ways, which is also the number of
distinct primes above h dividing n. The checks here use :class:`Fraction`
throughout and compare coefficients exactly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator

import numpy as np

from .errors import DomainError
from .sieve import (
    big_prime_divisor_counts,
    factor_profile_table,
    lambda_values,
    largest_prime_factor_table,
    primes_in_range,
    spf_table,
)

ROUGH_MAX = 10**7
REARRANGE_MAX = 10**6


def format_fraction(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


class CoefficientMap:
    """Sparse map n -> Fraction; zero weights are never stored."""

    def __init__(self):
        self._data: dict[int, Fraction] = {}

    def add(self, n: int, weight: Fraction) -> None:
        total = self._data.get(n, Fraction(0)) + weight
        if total:
            self._data[n] = total
        else:
            self._data.pop(n, None)

    def __getitem__(self, n: int) -> Fraction:
        return self._data.get(n, Fraction(0))

    def __len__(self) -> int:
        return len(self._data)

    def __iter__(self) -> Iterator[int]:
        return iter(sorted(self._data))

    def items(self):
        return sorted(self._data.items())

    def __eq__(self, other) -> bool:
        return isinstance(other, CoefficientMap) and self._data == other._data

    def diff(self, other: "CoefficientMap") -> list:
        keys = sorted(set(self._data) | set(other._data))
        return [(k, self[k], other[k]) for k in keys if self[k] != other[k]]


class _Tables:
    """lambda and omega_{>h} for 0..limit (index 0 unused)."""

    def __init__(self, limit: int, h: int):
        self.lam = np.zeros(limit + 1, dtype=np.int8)
        self.lam[1:] = lambda_values(1, limit)
        self.omega = big_prime_divisor_counts(limit, h)
        self.limit = limit
        self.h = h


def a_coefficient(m: int, h: int, lam: int, omega: int) -> Fraction:
    """a_m = -lambda(m) / (omega_{>h}(m) + 1)."""
    return Fraction(-lam, omega + 1)


def b_coefficient(m: int, h: int, lam: int, omega: int) -> Fraction:
    """b_m = -lambda(m) / (omega (omega + 1)); needs omega_{>h}(m) >= 1."""
    if omega < 1:
        raise DomainError(f"b_m undefined: omega_>{h}({m}) = 0")
    return Fraction(-lam, omega * (omega + 1))


# --- rough identity ----------------------------------------------------------------------


@dataclass
class IdentityFailure:
    n: int
    lhs: Fraction
    rhs: Fraction

    def to_json(self) -> str:
        return json.dumps({"n": self.n, "lhs": format_fraction(self.lhs), "rhs": format_fraction(self.rhs)})


@dataclass
class IdentityReport:
    X: int
    h: int
    checked: int
    failures: list = field(default_factory=list)
    misprint: bool = False

    @property
    def ok(self) -> bool:
        return not self.failures

    CSV_COLUMNS = ("X", "h", "checked", "failures")

    def row(self) -> dict:
        return {"X": self.X, "h": self.h, "checked": self.checked, "failures": len(self.failures)}


def rough_identity_terms(n: int, h: int, lam, omega, spf, *, misprint: bool = False) -> Fraction:
    """sum over primes p > h dividing n of lambda(p) lambda(n/p) / (omega_{>h}(n/p) + [p does not divide n/p]).

    ``misprint=True`` replaces the indicator by the constant 1.
    """
    total = Fraction(0)
    for p in factor_profile_table(n, spf).distinct_primes:
        if p <= h:
            continue
        m = n // p
        indicator = 1 if misprint else int(m % p != 0)
        total += Fraction(int(lam[p]) * int(lam[m]), int(omega[m]) + indicator)
    return total


def rough_identity_check(X: int, h: int, *, misprint: bool = False) -> IdentityReport:
    """For every rough n in [X, 4X] check the weighted p*m sum reproduces lambda(n) exactly."""
    X, h = int(X), int(h)
    if X < 1 or h < 1:
        raise DomainError("need X >= 1 and h >= 1")
    if 4 * X > ROUGH_MAX:
        raise DomainError(f"4X must be <= {ROUGH_MAX}")
    tab = _Tables(4 * X, h)
    spf = spf_table(4 * X)
    report = IdentityReport(X, h, 0, misprint=misprint)
    rough = np.flatnonzero(tab.omega[X : 4 * X + 1] > 0) + X
    for n in rough.tolist():
        lhs = rough_identity_terms(n, h, tab.lam, tab.omega, spf, misprint=misprint)
        rhs = Fraction(int(tab.lam[n]))
        report.checked += 1
        if lhs != rhs:
            report.failures.append(IdentityFailure(n, lhs, rhs))
    return report


# --- rearrangement ------------------------------------------------------------------------


@dataclass
class RearrangementReport:
    X: int
    h: int
    lhs_map: CoefficientMap
    rhs_map: CoefficientMap

    @property
    def equal(self) -> bool:
        return self.lhs_map == self.rhs_map

    CSV_COLUMNS = ("X", "h", "lhs_terms", "rhs_terms", "equal")

    def row(self) -> dict:
        return {
            "X": self.X,
            "h": self.h,
            "lhs_terms": len(self.lhs_map),
            "rhs_terms": len(self.rhs_map),
            "equal": self.equal,
        }


def _ceil_div(a: int, b: int) -> int:
    return -(-a // b)


def rearrangement_check(X: int, h: int) -> RearrangementReport:
    """Build both sides of the a_m / b_m rearrangement as coefficient maps.

    Left: key p*m, weight -lambda(m)/(omega_{>h}(m) + [p does not divide m]) for
    primes h < p <= 4X and ceil(X/p) <= m <= floor(4X/p).
    Right: a_m at key p*m over the same ranges, plus b_{m p} at key p*p*m for
    ceil(X/p^2) <= m <= floor(4X/p^2).
    """
    X, h = int(X), int(h)
    if X < 1 or h < 1:
        raise DomainError("need X >= 1 and h >= 1")
    if 4 * X > REARRANGE_MAX:
        raise DomainError(f"4X must be <= {REARRANGE_MAX}")
    top = 4 * X
    tab = _Tables(top, h)
    lam, omega = tab.lam, tab.omega
    lhs, rhs = CoefficientMap(), CoefficientMap()
    for p in primes_in_range(h + 1, top).tolist():
        for m in range(_ceil_div(X, p), top // p + 1):
            lm, om = int(lam[m]), int(omega[m])
            indicator = int(m % p != 0)
            lhs.add(p * m, Fraction(-lm, om + indicator))
            rhs.add(p * m, a_coefficient(m, h, lm, om))
        for m in range(_ceil_div(X, p * p), top // (p * p) + 1):
            mp = m * p
            rhs.add(p * mp, b_coefficient(mp, h, int(lam[mp]), int(omega[mp])))
    return RearrangementReport(X, h, lhs, rhs)


# --- smooth / rough split -----------------------------------------------------------------


@dataclass
class SplitReport:
    X: int
    h: int
    smooth_count: int
    rough_count: int
    smooth_sum: int
    rough_sum: int
    total: int
    misclassified: list

    @property
    def ok(self) -> bool:
        return not self.misclassified and self.smooth_sum + self.rough_sum == self.total

    CSV_COLUMNS = ("X", "h", "smooth_count", "rough_count", "smooth_sum", "rough_sum", "total", "ok")

    def row(self) -> dict:
        return {c: getattr(self, c) for c in self.CSV_COLUMNS}


def smooth_rough_split_check(X: int, h: int) -> SplitReport:
    """Partition [X, 4X] into h-smooth and rough n and check the lambda sums add up."""
    X, h = int(X), int(h)
    if X < 1 or h < 1:
        raise DomainError("need X >= 1 and h >= 1")
    top = 4 * X
    lam = lambda_values(X, top - X + 1).astype(np.int64)
    lpf = largest_prime_factor_table(top)[X:]
    omega = big_prime_divisor_counts(top, h)[X:]
    smooth = lpf <= h
    rough = omega > 0
    bad = np.flatnonzero(smooth == rough) + X
    return SplitReport(
        X,
        h,
        int(smooth.sum()),
        int(rough.sum()),
        int(lam[smooth].sum()),
        int(lam[rough].sum()),
        int(lam.sum()),
        bad.tolist(),
    )
