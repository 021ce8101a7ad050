import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from liouvar.errors import DomainError
from liouvar.smooth import (
    dickman_rho,
    psi_dfs,
    psi_estimate,
    psi_exact,
    psi_sieve,
    psi_table,
    smooth_numbers_dfs,
    smooth_density_check,
    threshold_H,
)

from oracles import psi_bruteforce, psi_recursive, small_primes


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3000), st.integers(1, 60))
def test_psi_bruteforce(x, y):
    expected = psi_bruteforce(x, y)
    assert psi_exact(x, y) == expected
    assert psi_dfs(x, y) == expected
    assert psi_sieve(x, y) == expected


def test_psi_recursive_oracle():
    assert psi_exact(10**6, 100) == 72271 == psi_recursive(10**6, small_primes(100))
    assert psi_exact(4 * 10**6, 50) == 65250


def test_psi_monotone():
    xs = [psi_exact(x, 13) for x in range(1, 400)]
    assert all(a <= b for a, b in zip(xs, xs[1:]))
    ys = [psi_exact(5000, y) for y in range(1, 80)]
    assert all(a <= b for a, b in zip(ys, ys[1:]))


def test_psi_domain():
    with pytest.raises(DomainError):
        psi_exact(0, 5)
    with pytest.raises(DomainError):
        psi_exact(10**10, 5, method="sieve")
    with pytest.raises(DomainError):
        psi_exact(10**13, 5)
    with pytest.raises(DomainError):
        psi_exact(10**6, 5000, method="dfs")


def test_dfs_large_x():
    # only 2^a 3^b remain; count lattice points directly
    x = 10**11
    direct = sum(1 for a in range(40) for b in range(30) if 2**a * 3**b <= x)
    assert psi_exact(x, 3) == direct


def test_rho_closed_forms():
    mpmath = pytest.importorskip("mpmath")
    assert dickman_rho(0.5) == 1.0 and dickman_rho(1) == 1.0
    assert abs(dickman_rho(1.5) - (1 - math.log(1.5))) < 1e-15
    for u in (2.0, 2.3, 2.75, 3.0):
        closed = 1 - (1 - mpmath.log(u - 1)) * mpmath.log(u) + mpmath.polylog(2, 1 - u) + mpmath.pi**2 / 12
        assert abs(dickman_rho(u) - float(closed)) < 1e-9


def test_rho_known_values():
    assert abs(dickman_rho(4) - 0.0049109256477608) < 1e-12
    assert abs(dickman_rho(10) / 2.77017183772596e-11 - 1) < 1e-6
    with pytest.raises(DomainError):
        dickman_rho(-0.1)
    with pytest.raises(DomainError):
        dickman_rho(51)


def test_rho_delay_equation():
    us = np.linspace(2.2, 6.8, 9)
    eps = 1e-4
    for u in us:
        deriv = (dickman_rho(u + eps) - dickman_rho(u - eps)) / (2 * eps)
        assert abs(u * deriv + dickman_rho(u - 1)) < 1e-6


def test_psi_estimate_record():
    rec = psi_estimate(10**6, 100)
    assert rec.psi_exact == 72271 and rec.u == pytest.approx(3.0)
    assert 0.5 < rec.ratios[0] < 2
    with pytest.raises(DomainError):
        psi_estimate(100, 1)


def test_threshold():
    assert threshold_H(1e8) == pytest.approx(177.711747829, rel=1e-10)
    for X in np.geomspace(1e6, 1e12, 13):
        assert threshold_H(X) < X**0.5
    with pytest.raises(DomainError):
        threshold_H(10)
    with pytest.raises(DomainError):
        threshold_H(1e6, c=0)


def test_density_warns_out_of_range():
    with pytest.warns(UserWarning):
        rep = smooth_density_check(1000, 500)
    assert not rep.in_range


@pytest.mark.parametrize("y", [1, 2, 13, 200])
def test_psi_tables(y):
    sieve = psi_table(3000, y, "sieve")
    assert np.array_equal(sieve, psi_table(3000, y, "dfs"))
    assert [int(v) for v in sieve[:60:7]] == [psi_bruteforce(x, y) for x in range(0, 60, 7)]
    smooth = smooth_numbers_dfs(3000, y)
    assert smooth[0] == 1 and np.all(np.diff(smooth) > 0)
