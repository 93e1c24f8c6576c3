from __future__ import annotations

import math
from fractions import Fraction

import pytest
from hypothesis import given, strategies as st
from mpmath import mp, mpf

from shortdiv.arith import divisors, factorize
from shortdiv.window import (
    DivisorTable,
    ExponentWindow,
    conjecture_scan,
    count_window,
    gap_check,
    reflection_check,
)

# running maxima for n <= 10^4, theta = 1/2, epsilon = 1/10; frozen from test_scan_oracle
SCAN_MAXIMA = [(1, 1), (12, 2), (144, 3), (840, 4), (2520, 5)]


def _abs(n, X, Y):
    return count_window(factorize(n), ExponentWindow.absolute(X, Y))


def _oracle_count(n: int, theta: str, eta: str) -> int:
    # trial division and 50-digit floats, independent of the package
    with mp.workdps(50):
        lo = mpf(n) ** mpf(theta)
        hi = lo + mpf(n) ** mpf(eta)
        return sum(1 for d in range(1, n + 1) if n % d == 0 and lo <= d <= hi)


@pytest.mark.parametrize("n, X, Y, count", [(12, 3, 3, 3), (1, 1, 1, 1), (100, 10, 0, 1)])
def test_count_examples(n, X, Y, count):
    assert _abs(n, X, Y) == count


@pytest.mark.parametrize("n, X, Y", [(12, 3, 3), (101, 1, 0), (100, 10, 10)])
def test_reflection_examples(n, X, Y):
    assert reflection_check(factorize(n), X, Y)


@pytest.mark.parametrize("n", [100, 36, 1, 2, 720720])
def test_gap_examples(n):
    assert gap_check(factorize(n))


def test_window_validation():
    with pytest.raises(ValueError):
        ExponentWindow.exponents(1, Fraction(1, 2))
    with pytest.raises(ValueError):
        ExponentWindow.exponents(Fraction(1, 2), 0)
    with pytest.raises(ValueError):
        ExponentWindow.absolute(0, 1)
    with pytest.raises(ValueError):
        ExponentWindow.absolute(1, -1)
    with pytest.raises(ValueError):
        reflection_check(factorize(12), 0, 1)


def test_integer_endpoints_are_inclusive():
    # 16^(1/2) = 4 and 16^(1/4) = 2: the window is exactly [4, 6]
    assert count_window(factorize(16), ExponentWindow.exponents(Fraction(1, 2), Fraction(1, 4))) == 1
    # 64^(1/2) = 8 and 64^(1/3) = 4: window [8, 12] holds only 8
    assert count_window(factorize(64), ExponentWindow.exponents(Fraction(1, 2), Fraction(1, 3))) == 1
    # 36^(1/2) = 6 and 36^(1/2) = 6: window [6, 12] holds 6, 9, 12
    assert count_window(factorize(36), ExponentWindow.exponents(Fraction(1, 2), Fraction(1, 2))) == 3


@given(st.integers(1, 10**6), st.fractions(min_value=1, max_value=1000, max_denominator=100), st.fractions(0, 100, max_denominator=100), st.fractions(0, 100, max_denominator=100))
def test_monotone_in_length(n, X, Y1, Y2):
    lo, hi = sorted((Y1, Y2))
    assert _abs(n, X, lo) <= _abs(n, X, hi)


@given(st.integers(1, 10**6))
def test_point_window_at_root(n):
    # sqrt(n) is a divisor exactly when n is a square
    root = ExponentWindow.exponents(Fraction(1, 2), Fraction(1, 10)).endpoints(n)[0]
    expected = 1 if math.isqrt(n) ** 2 == n else 0
    assert count_window(factorize(n), ExponentWindow.absolute(root, 0)) == expected


@given(st.integers(1, 10**8), st.data())
def test_reflection_on_sampled_windows(n, data):
    divs = divisors(factorize(n))
    d = data.draw(st.sampled_from(divs))
    X = d - data.draw(st.fractions(0, 1, max_denominator=50))
    Y = data.draw(st.fractions(0, 10, max_denominator=50))
    if X > 0:
        assert reflection_check(factorize(n), X, Y)


def test_scan_oracle():
    res = conjecture_scan(range(1, 10**4 + 1), "0.5", "0.1")
    assert res.rows == SCAN_MAXIMA
    best = -1
    rows = []
    for n in range(1, 3001):
        c = _oracle_count(n, "0.5", "0.4")
        if c > best:
            best = c
            rows.append((n, c))
    assert rows == SCAN_MAXIMA[: len(rows)]


def test_scan_small_examples():
    assert conjecture_scan(range(1, 2), "0.3", "0.1").rows == [(1, 1)]
    assert conjecture_scan([12], 0.5, 0.2).rows == [(12, 1)]
    assert conjecture_scan(range(12, 13), 0.5, 0.2).rows == [(12, 1)]
    with pytest.raises(ValueError):
        conjecture_scan([12], 0.5, 0.6)


def test_scan_csv_echoes_parameters():
    csv = conjecture_scan(range(1, 200), "0.50", "0.1").to_csv()
    assert csv.splitlines()[0] == "n,count,theta,epsilon"
    assert csv.splitlines()[1] == "1,1,0.50,0.1"


def test_scan_parallel_matches_serial():
    ns = list(range(1, 3000, 7))
    assert conjecture_scan(ns, "0.5", "0.1", jobs=2).rows == conjecture_scan(ns, "0.5", "0.1").rows


def test_table_matches_per_n_counts():
    table = DivisorTable(5000)
    for th, et in [("0.5", "0.4"), ("0.3", "0.05"), ("0.7", "0.45")]:
        counts = table.window_counts(th, et)
        w = ExponentWindow.exponents(th, et)
        for n in range(1, 5001):
            assert counts[n] == count_window(factorize(n), w), (n, th, et)
        for n in range(1, 400):
            assert counts[n] == _oracle_count(n, th, et)
