from __future__ import annotations

import itertools
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, strategies as st

from shortdiv.arith import factor_range, factorize, profile
from shortdiv.bounds import alpha_delta
from shortdiv.split import (
    NoSplit,
    divisor_identity_check,
    lemma1_check,
    lemma2_order,
    log_product_sign,
    pair_sequence,
    prefix_property,
    tau_b_check,
    theorem1_split,
    verify_split,
)

HALF, ETA = Fraction(1, 2), Fraction(3, 10)


@pytest.mark.parametrize("d, t", [([2, 3], 1), ([4, 6, 8], 2), ([5], -3)])
def test_lemma1_examples(d, t):
    assert lemma1_check(d, t)


def test_lemma1_exact_arithmetic():
    # 24^3 * (2*4*2) against (4*6*8)^2
    assert 24**3 * 16 >= 192**2
    with pytest.raises(ValueError):
        lemma1_check([], 1)
    with pytest.raises(ValueError):
        lemma1_check([0, 2], 1)


@given(st.lists(st.integers(1, 10**6), min_size=1, max_size=6), st.integers(-3, 5))
def test_lemma1_property(d, t):
    assert lemma1_check(d, t)


@pytest.mark.parametrize(
    "pairs, order",
    [([(1, 3), (3, 2)], [0, 1]), ([(3, 2), (1, 3)], [1, 0]), ([(2, 2), (2, 2)], [0, 1])],
)
def test_lemma2_examples(pairs, order):
    assert lemma2_order(pairs) == order


def test_lemma2_preconditions():
    with pytest.raises(ValueError):
        lemma2_order([(3, 1), (1, 1)])
    with pytest.raises(ValueError):
        lemma2_order([(0, 1)])


pos = st.fractions(min_value=Fraction(1, 100), max_value=10, max_denominator=100)


@given(st.lists(st.tuples(pos, pos), min_size=1, max_size=6))
def test_lemma2_prefixes_on_every_arrangement(pairs):
    assume(sum(x for x, _ in pairs) <= sum(y for _, y in pairs))
    for perm in itertools.permutations(pairs):
        order = lemma2_order(list(perm))
        assert sorted(order) == list(range(len(perm)))
        sx = sy = 0
        for i in order:
            sx += perm[i][0]
            sy += perm[i][1]
            assert sx <= sy


def test_pair_sequence_examples():
    ps = pair_sequence(6).pairs
    assert ps[0][0] == pytest.approx(0.5) and ps[1][0] == pytest.approx(0.5)
    assert ps[0][1] == pytest.approx(math.log(2) / math.log(6))
    assert ps[1][1] == pytest.approx(math.log(3) / math.log(6))
    ps = pair_sequence(12).pairs
    assert ps[0] == pytest.approx((math.log(3) / math.log(6), 2 * math.log(2) / math.log(12)))
    assert ps[1] == pytest.approx((math.log(2) / math.log(6), math.log(3) / math.log(12)))
    assert pair_sequence(7**5).pairs == ((1.0, 1.0),)
    with pytest.raises(ValueError):
        pair_sequence(1)


@given(st.integers(2, 10**12))
def test_pair_sums_are_one(n):
    ps = pair_sequence(n).pairs
    assert sum(r for r, _ in ps) == pytest.approx(1.0)
    assert sum(t for _, t in ps) == pytest.approx(1.0)


@given(st.integers(1, 10**6), st.integers(1, 200), st.integers(1, 10**6), st.integers(1, 10**6))
def test_log_product_sign_matches_floats(B, tau, T, n):
    v = math.log(B) * math.log(tau) - math.log(T) * math.log(n)
    s = log_product_sign(B, tau, T, n)
    if abs(v) > 1e-9:
        assert s == (1 if v > 0 else -1)


def test_log_product_sign_exact_ties():
    # log 4 log 9 = log 2 log 81 = 4 log 2 log 3
    assert log_product_sign(4, 9, 2, 81) == 0
    assert log_product_sign(12, 6, 6, 12) == 0
    assert log_product_sign(8, 9, 4, 27) == 0


def test_split_120():
    sp = theorem1_split(120, 0.5, 0.3)
    assert sp.delta == pytest.approx(1 / math.log(16))
    assert sp.xi == Fraction(4, 5)
    assert (sp.a.value, sp.b.value) == (24, 5)
    v = verify_split(sp)
    assert all(v[k] for k in ("product", "coprime", "prefix", "minimal_s", "tau_b_check", "identity"))
    assert tau_b_check(sp, 120)


@pytest.mark.parametrize("p, k", [(2, 10), (3, 7), (101, 4)])
def test_split_prime_power(p, k):
    sp = theorem1_split(p**k, HALF, ETA)
    assert (sp.a.value, sp.b.value, sp.s) == (1, p**k, 1)


def test_split_primorial():
    n = 2 * 3 * 5 * 7 * 11 * 13 * 17 * 19
    sp = theorem1_split(n, HALF, ETA)
    assert prefix_property(sp.n, sp.permutation)
    assert sp.b.value == 143
    assert all(verify_split(sp)[k] for k in ("product", "coprime", "prefix", "minimal_s", "tau_b_check", "identity"))


def test_tau_b_on_prime_powers():
    checked = 0
    for k in range(1, 101):
        try:
            sp = theorem1_split(2**k, HALF, ETA)
        except NoSplit as exc:
            assert exc.regime in ("tau<3", "trivial", "small_eta")
            continue
        assert profile(sp.b).tau == k + 1
        assert tau_b_check(sp)
        checked += 1
    assert checked >= 95


def test_regimes():
    with pytest.raises(NoSplit) as e:
        theorem1_split(7, HALF, ETA)
    assert e.value.regime == "tau<3"
    # tau = 4: delta = 1/log 4 > xi = 2/5
    with pytest.raises(NoSplit) as e:
        theorem1_split(6, 0.7, 0.6)
    assert e.value.regime == "trivial"
    # eta far below theta^2
    with pytest.raises(NoSplit) as e:
        theorem1_split(720720, HALF, 0.1)
    assert e.value.regime == "small_eta"


def _float_split(n: int, theta: Fraction, eta: Fraction):
    # every step recomputed with plain floats from the definitions
    f = factorize(n)
    tau = profile(f).tau
    delta = 1 / math.log(tau)
    alpha = alpha_delta(theta, eta, Fraction(delta)).value
    rho = [math.log(e + 1) / math.log(tau) for _, e in f.factors]
    th = [e * math.log(p) / math.log(n) for p, e in f.factors]
    first = [i for i in range(len(rho)) if rho[i] <= th[i]]
    order = first + [i for i in range(len(rho)) if i not in first]
    acc = 0.0
    for s, i in enumerate(order, 1):
        acc += th[i]
        if acc >= 1 - alpha:
            break
    b = math.prod(f.factors[i][0] ** f.factors[i][1] for i in order[:s])
    margin = min(abs(acc - (1 - alpha)), min(abs(r - t) for r, t in zip(rho, th)))
    return b, s, margin


def test_split_matches_float_recomputation():
    compared = 0
    for f in factor_range(3000, 2):
        for th, et in [(HALF, ETA), (Fraction(3, 10), Fraction(1, 10)), (Fraction(7, 10), Fraction(3, 5))]:
            try:
                sp = theorem1_split(f, th, et)
            except NoSplit:
                continue
            b, s, margin = _float_split(f.value, th, et)
            if margin > 1e-9:
                assert (sp.b.value, sp.s) == (b, s), (f.value, th, et)
                compared += 1
    assert compared > 1000


def test_identity_reports_both_sides():
    sp = theorem1_split(720720, HALF, Fraction(2, 5))
    out = divisor_identity_check(sp)
    assert out["identity"] and out["lhs"] == out["rhs"] and out["guard_violations"] == 0
