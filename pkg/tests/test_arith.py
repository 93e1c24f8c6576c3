from __future__ import annotations

import pytest
import sympy
from hypothesis import given, strategies as st

from shortdiv.arith import (
    FactoredInteger,
    ResourceLimitError,
    divisor_count,
    divisors,
    factor_range,
    factorize,
    is_prime,
    prime_sieve,
    primes_above,
    primes_in,
    profile,
    segmented_primes,
)


@pytest.mark.parametrize(
    "n, factors",
    [(1, ()), (12, ((2, 2), (3, 1))), (2016, ((2, 5), (3, 2), (7, 1)))],
)
def test_factorize_examples(n, factors):
    f = factorize(n)
    assert f.value == n and f.factors == factors


@pytest.mark.parametrize(
    "n, divs",
    [(12, [1, 2, 3, 4, 6, 12]), (1, [1]), (36, [1, 2, 3, 4, 6, 9, 12, 18, 36])],
)
def test_divisors_examples(n, divs):
    assert divisors(factorize(n)) == divs


@pytest.mark.parametrize(
    "n, expected",
    [(12, (6, 2, 5, 2)), (1, (1, 0, 0, 0)), (2016, (36, 3, 30, 5))],
)
def test_profile_examples(n, expected):
    p = profile(factorize(n))
    assert (p.tau, p.omega, p.big_omega2, p.v_max) == expected


@pytest.mark.parametrize("M, count, primes", [(10, 3, [11, 13, 17]), (2, 1, [3]), (100, 4, [101, 103, 107, 109])])
def test_primes_above_examples(M, count, primes):
    assert primes_above(M, count) == primes
    # segmented sieve as the independent route
    assert segmented_primes(M + 1, primes[-1]) == primes


def test_bad_inputs():
    with pytest.raises(ValueError):
        factorize(0)
    with pytest.raises(ValueError):
        FactoredInteger(12, ((3, 1), (2, 2)))
    with pytest.raises(ValueError):
        FactoredInteger(13, ((2, 2), (3, 1)))
    with pytest.raises(ResourceLimitError):
        factorize(2**300 + 1)
    with pytest.raises(ResourceLimitError, match="tau"):
        divisors(factorize(2**30), budget=8)


@given(st.integers(1, 10**15))
def test_factorize_round_trip(n):
    f = factorize(n)
    assert factorize(f.value) == f
    assert FactoredInteger.from_factors(f.factors) == f


@given(st.integers(1, 10**9))
def test_divisors_properties(n):
    f = factorize(n)
    ds = divisors(f)
    assert len(ds) == profile(f).tau == divisor_count(f)
    assert all(n % d == 0 for d in ds)
    assert all(x < y for x, y in zip(ds, ds[1:]))


def test_divisor_counts_exhaustive():
    for f in factor_range(10**5):
        assert len(divisors(f)) == profile(f).tau


def test_factor_range_matches_factorize():
    for f in factor_range(3000):
        assert f == factorize(f.value)


@given(st.integers(-5, 10**18))
def test_is_prime_matches_sympy(n):
    assert is_prime(n) == sympy.isprime(n)


def test_is_prime_large_known_values():
    assert is_prime(2**61 - 1)
    assert is_prime(2**89 - 1)
    assert not is_prime((2**61 - 1) * (2**31 - 1))
    # a strong pseudoprime to several small bases
    assert not is_prime(3825123056546413051)


def test_prime_tables_agree():
    flags = prime_sieve(5000)
    direct = [p for p in range(5001) if flags[p]]
    assert direct == list(primes_in(0, 5000))
    assert segmented_primes(4000, 5000) == [p for p in direct if p >= 4000]
    assert direct[:5] == [2, 3, 5, 7, 11] and len(direct) == 669
