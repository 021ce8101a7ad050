from fractions import Fraction

import pytest

from liouvar.errors import DomainError
from liouvar.identities import (
    CoefficientMap,
    a_coefficient,
    b_coefficient,
    format_fraction,
    rearrangement_check,
    rough_identity_check,
    smooth_rough_split_check,
)
from liouvar.sieve import factor_profile

from oracles import liouville_bruteforce


def test_coefficients():
    # 12 = 2^2 * 3 has no prime above 5
    assert a_coefficient(12, 5, liouville_bruteforce(12), 0) == 1
    assert b_coefficient(7, 5, -1, 1) == Fraction(1, 2)
    with pytest.raises(DomainError):
        b_coefficient(12, 5, -1, 0)


def test_format_fraction():
    assert format_fraction(Fraction(3)) == "3/1"
    assert format_fraction(Fraction(-2, 6)) == "-1/3"


def test_coefficient_map_prunes():
    m = CoefficientMap()
    m.add(5, Fraction(1, 2))
    m.add(5, Fraction(-1, 2))
    assert len(m) == 0 and m[5] == 0


@pytest.mark.parametrize("X,h", [(100, 2), (500, 7), (2000, 30)])
def test_rough_identity(X, h):
    rep = rough_identity_check(X, h)
    assert rep.ok and rep.checked > 0


def test_misprint_fails():
    rep = rough_identity_check(100, 5, misprint=True)
    assert not rep.ok
    assert 121 in [f.n for f in rep.failures]


def test_rearrangement_recovers_lambda():
    rep = rearrangement_check(100, 5)
    assert rep.equal
    for n in range(100, 401):
        if factor_profile(n).omega_above(5) > 0:
            assert rep.lhs_map[n] == liouville_bruteforce(n)
        else:
            assert rep.lhs_map[n] == 0


def test_rearrangement_guard():
    with pytest.raises(DomainError):
        rearrangement_check(10**6, 5)


def test_split():
    rep = smooth_rough_split_check(50, 7)
    assert rep.ok
    assert (rep.smooth_sum, rep.rough_sum, rep.total) == (-3, -8, -11)
    assert rep.smooth_count + rep.rough_count == 151
