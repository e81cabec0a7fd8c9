import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from mfunctions.errors import DomainError
from mfunctions.primesys import (NumberField, enumerate_sites, is_fundamental_discriminant, kronecker,
                                 prime_sieve, rational_system)


def _brute_primes(n):
    return [p for p in range(2, n + 1) if all(p % d for d in range(2, math.isqrt(p) + 1))]


def _brute_kronecker(D, p):
    # solvability of x^2 = D mod p (odd p), or the mod-8 rule at 2
    if D % p == 0:
        return 0
    if p == 2:
        return 1 if D % 8 in (1, 7) else -1
    return 1 if any((x * x - D) % p == 0 for x in range(p)) else -1


@pytest.mark.parametrize("D,p,want", [(-4, 5, 1), (-4, 2, 0), (-4, 3, -1)])
def test_kronecker_examples(D, p, want):
    assert kronecker(D, p) == want


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -15, -20, -23, -24, -163])
def test_kronecker_matches_brute_force(D):
    for p in _brute_primes(200):
        assert kronecker(D, p) == _brute_kronecker(D, p), (D, p)


def test_fundamental_discriminants():
    assert all(is_fundamental_discriminant(d) for d in (-3, -4, -7, -8, -20, -24))
    assert not any(is_fundamental_discriminant(d) for d in (-1, -2, -12, -16, -5, 0))
    assert is_fundamental_discriminant(5)  # real quadratic; rejected by NumberField separately


def test_sieve_against_trial_division():
    assert list(prime_sieve(1000)) == _brute_primes(1000)


def test_rational_examples():
    assert list(rational_system(10).norms) == [2, 3, 5, 7]
    assert len(rational_system(1.5)) == 0


def test_gaussian_field_example():
    sys_ = enumerate_sites(NumberField(-4), 10)
    assert list(sys_.norms) == [2, 5, 5, 9]
    assert [s.residue_prime for s in sys_] == [2, 5, 5, 3]


def test_count_equals_prime_pi():
    for y in (10, 100, 1000, 10_000):
        assert len(rational_system(y)) == len(_brute_primes(y))


@pytest.mark.parametrize("D", [-3, -4, -7, -8, -23])
def test_quadratic_multiplicities(D):
    y = 500
    sys_ = enumerate_sites(NumberField(D), y)
    by_p = {}
    for s in sys_:
        by_p.setdefault(s.residue_prime, []).append(s.norm)
    for p in _brute_primes(y):
        k = _brute_kronecker(D, p)
        got = sorted(by_p.get(p, []))
        if k == 1:
            assert got == [p, p]
        elif k == 0:
            assert got == [p]
        else:
            assert got == ([p * p] if p * p <= y else [])


def test_invalid_discriminant():
    with pytest.raises(DomainError):
        NumberField(-12)
    with pytest.raises(DomainError):
        NumberField(5)


@settings(max_examples=30, deadline=None)
@given(st.floats(min_value=0, max_value=3000, allow_nan=False))
def test_enumeration_is_pure(y):
    a, b = rational_system(y), rational_system(y)
    assert a == b
    assert np.all(np.diff(a.norms) > 0)


def test_records_shape():
    recs = rational_system(5).to_records()
    assert recs == [{"residue_prime": 2, "norm": 2}, {"residue_prime": 3, "norm": 3},
                    {"residue_prime": 5, "norm": 5}]
