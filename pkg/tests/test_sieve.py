from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from shortdiv.arith import ResourceLimitError, factorize
from shortdiv.sieve import (
    SieveSpec,
    build_sieve_spec,
    count_unsolvable,
    f_values,
    is_square_mod_prime_power,
    large_sieve_bound,
    sieve_bound_scan,
    sieve_window_check,
    unsolvable_bruteforce,
    weight_h,
)

odd_primes = st.sampled_from([3, 5, 7, 11, 13, 17, 19, 23])
coprime_ab = st.tuples(st.integers(1, 10), st.integers(1, 10)).filter(lambda t: math.gcd(*t) == 1)


@pytest.mark.parametrize(
    "n, a, b, d, f, fs",
    [(36, 1, 1, 6, 12, 0), (12, 1, 1, 3, 7, 1), (12, 3, 1, 6, 12, 0)],
)
def test_f_values_examples(n, a, b, d, f, fs):
    assert f_values(factorize(n), a, b, d) == (f, fs)
    assert f * f - fs * fs == 4 * a * b * n


def test_f_values_errors():
    with pytest.raises(ValueError):
        f_values(12, 1, 1, 5)
    with pytest.raises(ValueError):
        f_values(12, 2, 4, 3)


@pytest.mark.parametrize("p, v, u, count", [(3, 0, 1, 2), (3, 2, 1, 6), (5, 1, 1, 5), (5, 1, 2, 5), (5, 1, 3, 5), (5, 1, 4, 5)])
def test_count_unsolvable_examples(p, v, u, count):
    assert count_unsolvable(p, v, u) == count


@pytest.mark.parametrize("p, v, u, count", [(3, 0, 1, 2), (5, 1, 2, 5), (7, 3, 3, 49)])
def test_bruteforce_examples(p, v, u, count):
    assert unsolvable_bruteforce(p, v, u) == count


def test_argument_errors():
    for p, u in [(2, 1), (9, 1), (3, 3), (5, 0)]:
        with pytest.raises(ValueError):
            count_unsolvable(p, 0, u)
    with pytest.raises(ResourceLimitError):
        unsolvable_bruteforce(101, 3, 1)


@given(odd_primes, st.integers(0, 4), st.integers(1, 10**6))
def test_recurrence_matches_enumeration(p, v, u):
    if u % p == 0 or p ** (v + 1) > 10**5:
        return
    assert count_unsolvable(p, v, u) == unsolvable_bruteforce(p, v, u)


def test_weight_examples():
    # n = 3, a = b = 1: 4abn = 12, so the modulus at 3 is 9 with 3 excluded classes
    spec = build_sieve_spec(3, 1, 1, 10)
    assert weight_h(spec, 1) == 1
    assert weight_h(spec, 9) == Fraction(1, 2)
    assert weight_h(spec, 3) == 0
    assert weight_h(spec, 27) == 0
    # p = 5 does not divide 12: x^2 - 12 is a non-square for 3 of the 5 classes
    assert weight_h(spec, 5) == Fraction(3, 2)
    assert weight_h(spec, 45) == Fraction(3, 4)


def test_large_sieve_examples():
    empty = SieveSpec((), 1)
    assert empty.H == 1 and large_sieve_bound(empty, 10) == 11
    one = SieveSpec.from_pairs([(9, 3)], 9)
    assert one.H == Fraction(3, 2)
    assert large_sieve_bound(one, 10) == Fraction(91) / Fraction(3, 2)
    with pytest.raises(ValueError):
        SieveSpec.from_pairs([(12, 3)], 12)
    assert large_sieve_bound(SieveSpec.from_pairs([(9, 3)], 1), 5) == 6


def _weight_oracle(n: int, a: int, b: int, Q: int) -> Fraction:
    # H from its definition with brute-force excluded counts
    c = 4 * a * b * n
    total = Fraction(0)
    for q in range(1, Q + 1):
        h = Fraction(1)
        for p, k in factorize(q).factors:
            v = 0
            while c % p ** (v + 1) == 0:
                v += 1
            if p == 2 or k != v + 1:
                h = Fraction(0)
                break
            m = p**k
            omega = sum(1 for x in range(m) if not is_square_mod_prime_power(x * x - c, p, k))
            h *= Fraction(omega, m - omega)
        total += h
    return total


def test_weight_sum_against_definition():
    assert build_sieve_spec(210, 1, 1, 30).H == Fraction(61, 8) == _weight_oracle(210, 1, 1, 30)
    for n, a, b, Q in [(36, 1, 1, 50), (1000, 3, 7, 40), (999999, 10, 9, 50), (2, 1, 2, 27)]:
        assert build_sieve_spec(n, a, b, Q).H == _weight_oracle(n, a, b, Q)


@given(st.integers(1, 10**6), coprime_ab, st.integers(3, 50))
def test_excluded_counts_by_enumeration(n, ab, Q):
    a, b = ab
    c = 4 * a * b * n
    for m in build_sieve_spec(n, a, b, Q).moduli:
        if m.modulus > 3000:
            continue
        omega = sum(1 for x in range(m.modulus) if not is_square_mod_prime_power(x * x - c, m.prime, m.v + 1))
        assert omega == m.excluded


@given(st.integers(1, 10**6), coprime_ab, st.integers(1, 10))
def test_weight_sum_monotone_in_cutoff(n, ab, i):
    rows = sieve_bound_scan(n, *ab, i, 40)
    Hs = [H for _, H, _ in rows]
    assert all(x <= y for x, y in zip(Hs, Hs[1:]))
    assert rows[0] == (1, 1, i + 2)


def _window_count_oracle(n: int, a: int, b: int, i: int) -> int:
    with mp.workdps(60):
        x0 = mp.sqrt(mpf(a * n) / b)
        hi = x0 + mp.sqrt(i * x0 / b)
        return sum(1 for d in range(1, n + 1) if n % d == 0 and x0 <= d <= hi)


def test_window_examples():
    r = sieve_window_check(36, 1, 1, 2, 1)
    assert r.count <= 3 and r.count <= r.cap_sieve and r.ok
    # window [6, 6 + sqrt(12)] holds 6 and 9
    assert r.count == _window_count_oracle(36, 1, 1, 2) == 2
    for p in (2, 101, 7919):
        for a, b, i in [(1, 1, 1), (3, 2, 7), (1, 9, 10)]:
            r = sieve_window_check(p, a, b, i, 20)
            assert r.count in (0, 1) and r.ok
    n = 2**2 * 3**2 * 5**2 * 7**2
    r = sieve_window_check(n, 1, 1, 4, 10)
    d = r.to_dict()
    assert d["ok"] and d["avoids_excluded_classes"] and d["f_injective"]
    assert d["count"] <= d["cap_elementary"] == 5
    assert Fraction(d["cap_sieve"]) >= d["count"]
    assert r.count == _window_count_oracle(n, 1, 1, 4)


@given(st.integers(1, 20000), coprime_ab, st.integers(1, 10), st.integers(1, 50))
def test_window_report_consistent(n, ab, i, Q):
    a, b = ab
    r = sieve_window_check(n, a, b, i, Q)
    assert r.ok
    assert r.count == _window_count_oracle(n, a, b, i)


def test_window_argument_errors():
    with pytest.raises(ValueError):
        sieve_window_check(36, 2, 2, 1, 5)
    with pytest.raises(ValueError):
        sieve_window_check(36, 1, 1, 0, 5)
