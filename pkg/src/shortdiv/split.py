"""Coprime splitting ``n = a*b`` driven by the (rho_i, theta_i) pairs of ``n``.

Sums of ``rho_i = log(beta_i+1)/log tau(n)`` and ``theta_i = log(p_i^beta_i)/log n``
are compared without rounding: ``sum rho <= sum theta`` is rewritten as
``log T * log n <= log B * log tau`` with integers ``T, B``, expanded into a
quadratic form in the logarithms of primes.  An identically zero form is an
exact tie; otherwise the sign is certified by :mod:`shortdiv.hpreal`.
"""

from __future__ import annotations

import json
import math
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from bisect import bisect_left, bisect_right
from functools import lru_cache, reduce
from typing import Sequence

from .arith import FactoredInteger, as_factored, divisors, factorize, profile
from .bounds import alpha_delta, xi
from .hpreal import _ULP, compare, const, lift, log, root_power, to_fraction
from .window import ExponentWindow, count_between

_FAST_REL = 1e-9


class NoSplit(Exception):
    """The split is not needed: the bound holds for another reason.

    ``regime`` is ``"tau<3"``, ``"trivial"`` (delta >= xi) or
    ``"small_eta"`` (eta below the shifted threshold).
    """

    def __init__(self, regime: str, detail: str = "") -> None:
        super().__init__(f"{regime}: {detail}" if detail else regime)
        self.regime = regime


@dataclass(frozen=True)
class PairSequence:
    pairs: tuple[tuple[float, float], ...]
    source: FactoredInteger


@dataclass(frozen=True)
class SplitResult:
    n: FactoredInteger
    a: FactoredInteger
    b: FactoredInteger
    s: int
    alpha_used: float
    permutation: tuple[int, ...]
    delta: float
    xi: Fraction
    theta: Fraction
    eta: Fraction
    candidate: str = ""
    checks: dict = field(default_factory=dict, compare=False)

    def to_dict(self) -> dict:
        return {
            "n": str(self.n.value),
            "theta": str(self.theta),
            "eta": str(self.eta),
            "a": {"value": str(self.a.value), "factors": [[str(p), e] for p, e in self.a.factors]},
            "b": {"value": str(self.b.value), "factors": [[str(p), e] for p, e in self.b.factors]},
            "permutation": list(self.permutation),
            "s": self.s,
            "delta": repr(self.delta),
            "xi": str(self.xi),
            "alpha_used": repr(self.alpha_used),
            "candidate": self.candidate,
            **self.checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


# -- lemma checkers -----------------------------------------------------------


def lemma1_check(d: Sequence[int], t: int) -> bool:
    """lcm(d)^(t(t+1)/2) * prod_{i<j} gcd(d_i, d_j) >= prod d_i^t, exactly."""
    d = [int(x) for x in d]
    if not d or min(d) < 1:
        raise ValueError("lemma1_check needs a non-empty list of positive integers")
    t = int(t)
    lcm = reduce(math.lcm, d)
    g = 1
    for i in range(len(d)):
        for j in range(i + 1, len(d)):
            g *= math.gcd(d[i], d[j])
    lhs = lcm ** (t * (t + 1) // 2) * g
    prod = math.prod(d)
    if t >= 0:
        return lhs >= prod**t
    return lhs * prod ** (-t) >= 1


def _partition_order(nondeficient: Sequence[bool]) -> list[int]:
    first = [i for i, ok in enumerate(nondeficient) if ok]
    rest = [i for i, ok in enumerate(nondeficient) if not ok]
    return first + rest


def lemma2_order(pairs: Sequence[tuple]) -> list[int]:
    """Permutation whose every prefix has sum x <= sum y.

    Pairs with ``x <= y`` come first, then the others, each group in
    input order.  Arithmetic is exact on the given numbers.
    """
    xs = [Fraction(x) if isinstance(x, float) else to_fraction(x) for x, _ in pairs]
    ys = [Fraction(y) if isinstance(y, float) else to_fraction(y) for _, y in pairs]
    if min(xs + ys, default=1) <= 0:
        raise ValueError("lemma2_order needs positive pairs")
    if sum(xs) > sum(ys):
        raise ValueError("lemma2_order needs sum x <= sum y")
    order = _partition_order([x <= y for x, y in zip(xs, ys)])
    sx = sy = Fraction(0)
    for i in order:
        sx += xs[i]
        sy += ys[i]
        if sx > sy:
            raise AssertionError(f"prefix property violated at index {i}")
    return order


# -- log-quadratic comparisons -----------------------------------------------


def _log_vector(n: int) -> dict[int, int]:
    return dict(factorize(n).factors)


def _quad(u: dict[int, int], v: dict[int, int]) -> dict[tuple[int, int], int]:
    out: dict[tuple[int, int], int] = defaultdict(int)
    for p, a in u.items():
        for q, b in v.items():
            out[(p, q) if p <= q else (q, p)] += a * b
    return out


def log_product_sign(B: int, tau: int, T: int, n: int) -> int:
    """Sign of ``log B * log tau - log T * log n`` (all arguments >= 1)."""
    if B == n and T == tau:
        return 0
    v = math.log(B) * math.log(tau) - math.log(T) * math.log(n)
    scale = math.log(B) * math.log(tau) + math.log(T) * math.log(n)
    if abs(v) > _FAST_REL * scale:
        return 1 if v > 0 else -1
    form = _quad(_log_vector(B), _log_vector(tau))
    for k, c in _quad(_log_vector(T), _log_vector(n)).items():
        form[k] -= c
    terms = [(k, c) for k, c in form.items() if c]
    if not terms:
        return 0
    pos = sum((const(c) * log(p) * log(q) for (p, q), c in terms if c > 0), const(0))
    neg = sum((const(-c) * log(p) * log(q) for (p, q), c in terms if c < 0), const(0))
    return compare(pos, neg)


def pair_sequence(n) -> PairSequence:
    """(rho_i, theta_i) with beta_i + 1 = tau^rho_i and p_i^beta_i = n^theta_i."""
    n = as_factored(n)
    prof = profile(n)
    if prof.tau < 2:
        raise ValueError("pair_sequence needs n >= 2")
    if prof.omega == 1:
        # a lone prime power carries all of tau and all of n
        return PairSequence(((1.0, 1.0),), n)
    lt, ln = math.log(prof.tau), math.log(n.value)
    pairs = tuple((math.log(e + 1) / lt, e * math.log(p) / ln) for p, e in n.factors)
    return PairSequence(pairs, n)


# the order and its prefix check depend on n only; sweeps over (theta, eta)
# hit these caches for consecutive calls with the same n
@lru_cache(maxsize=64)
def _order_for(n: FactoredInteger, tau: int) -> tuple[int, ...]:
    flags = [log_product_sign(p**e, tau, e + 1, n.value) >= 0 for p, e in n.factors]
    return tuple(_partition_order(flags))


@lru_cache(maxsize=256)
def _divisors(n: FactoredInteger) -> list[int]:
    return divisors(n)


def prefix_property(n: FactoredInteger, order: Sequence[int]) -> bool:
    """Exact check that every prefix has sum rho <= sum theta."""
    return _prefix_property(n, tuple(order))


@lru_cache(maxsize=64)
def _prefix_property(n: FactoredInteger, order: tuple[int, ...]) -> bool:
    tau = profile(n).tau
    B = T = 1
    for i in order:
        p, e = n.factors[i]
        B *= p**e
        T *= e + 1
        if log_product_sign(B, tau, T, n.value) < 0:
            return False
    return True


def _covers(B: int, n: int, one_minus_alpha: Fraction) -> bool:
    # log B >= (1 - alpha) log n  <=>  B >= n^(1-alpha)
    return compare(B, root_power(n, one_minus_alpha)) >= 0


def theorem1_split(n, theta, eta) -> SplitResult:
    """Coprime split n = a*b with b the shortest prefix covering n^(1-alpha)."""
    n = as_factored(n)
    theta, eta = to_fraction(theta), to_fraction(eta)
    prof = profile(n)
    if prof.tau < 3:
        raise NoSplit("tau<3", f"tau(n) = {prof.tau}")
    x = xi(theta, eta).exact
    delta = 1 / math.log(prof.tau)
    d = Fraction(delta)
    if d >= x:
        raise NoSplit("trivial", f"delta = {delta!r} >= xi = {x}")
    if eta < theta * theta - (theta * (1 - theta)) ** 2 * d:
        raise NoSplit("small_eta", "eta < theta^2 - (theta(1-theta))^2 delta")
    ad = alpha_delta(theta, eta, d)
    alpha = ad.value
    one_minus = 1 - Fraction(alpha)
    order = _order_for(n, prof.tau)
    B = 1
    s = 0
    for i in order:
        p, e = n.factors[i]
        B *= p**e
        s += 1
        if _covers(B, n.value, one_minus):
            break
    chosen = sorted(order[:s])
    b = FactoredInteger.from_factors(n.factors[i] for i in chosen)
    a = FactoredInteger.from_factors(n.factors[i] for i in range(len(n.factors)) if i not in chosen)
    return SplitResult(
        n=n,
        a=a,
        b=b,
        s=s,
        alpha_used=alpha,
        permutation=tuple(order),
        delta=delta,
        xi=x,
        theta=theta,
        eta=eta,
        candidate=ad.candidate.value,
    )


def tau_b_bound(split: SplitResult, n=None):
    n = split.n if n is None else as_factored(n)
    prof = profile(n)
    return 2 * prof.v_max * root_power(prof.tau, 1 - Fraction(split.alpha_used))


def tau_b_check(split: SplitResult, n=None, bound=None) -> bool:
    """tau(b) <= 2 V(n) tau(n)^(1 - alpha_used), certified."""
    if bound is None:
        bound = tau_b_bound(split, n)
    return compare(profile(split.b).tau, bound) <= 0


def minimality_check(split: SplitResult) -> bool:
    n = split.n
    one_minus = 1 - Fraction(split.alpha_used)
    prefix = split.permutation[: split.s]
    B_full = math.prod(n.factors[i][0] ** n.factors[i][1] for i in prefix)
    B_short = B_full // (n.factors[prefix[-1]][0] ** n.factors[prefix[-1]][1])
    if B_full != split.b.value or not _covers(B_full, n.value, one_minus):
        return False
    return split.s == 1 or not _covers(B_short, n.value, one_minus)


def _count_scaled(divs: Sequence[int], X, Y, e: int) -> int:
    """Divisors in [X/e, X/e + Y/e]; floats decide unless a divisor sits near an end."""
    fx, fy = X.fast(), Y.fast()
    if fx is not None and fy is not None:
        lo = fx[0] / e
        hi = lo + fy[0] / e
        g = 2 * (fx[1] + fy[1]) / e + 8 * _ULP * hi + 1e-300
        i, j = bisect_left(divs, lo - g), bisect_right(divs, lo + g)
        k, m = bisect_left(divs, hi - g), bisect_right(divs, hi + g)
        if i == j and k == m:
            return max(0, k - j)
    lo = X / e
    return count_between(divs, lo, lo + Y / e)


def divisor_identity_check(split: SplitResult) -> dict:
    """D_n(X, Y) against sum over e | b of D_a(X/e, Y/e), X = n^theta, Y = n^eta.

    Also checks that D_a(X/e, Y/e) <= 1 whenever e > Y or X/e > a/2.
    """
    n, a, b = split.n, split.a, split.b
    w = ExponentWindow.exponents(split.theta, split.eta)
    lhs = count_between(_divisors(n), *w.endpoints(n.value))
    X = root_power(n.value, split.theta)
    Y = root_power(n.value, split.eta)
    a_divs = _divisors(a)
    rhs = 0
    guard_violations = 0
    for e in _divisors(b):
        c = _count_scaled(a_divs, X, Y, e)
        rhs += c
        if c > 1 and (compare(e, Y) > 0 or compare(X / e, Fraction(a.value, 2)) > 0):
            guard_violations += 1
    return {"lhs": lhs, "rhs": rhs, "identity": lhs == rhs, "guard_violations": guard_violations}


def verify_split(split: SplitResult) -> dict:
    """Every exact invariant of a split, as a flat dict of booleans and values."""
    n = split.n
    tb = profile(split.b).tau
    bound = tau_b_bound(split)
    out = {
        "product": split.a.value * split.b.value == n.value,
        "coprime": math.gcd(split.a.value, split.b.value) == 1,
        "prefix": prefix_property(n, split.permutation),
        "minimal_s": minimality_check(split),
        "tau_b": tb,
        "tau_b_bound": repr(bound.approx()),
        "tau_b_check": tau_b_check(split, bound=bound),
    }
    out.update(divisor_identity_check(split))
    return out
