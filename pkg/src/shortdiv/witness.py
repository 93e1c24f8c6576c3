"""Integers with many divisors packed into one short window.

Take the ``s`` smallest primes above ``M`` (all within ``L = (log M)^2`` of
``M``) and scale their product ``N0`` by the largest ``m`` keeping
``N^theta`` just below ``M^r``.  Every product of ``r`` of those primes then
lies in ``[N^theta, N^theta + N^(theta - epsilon)]``.  The large-theta
variant mirrors this with ``1 - theta`` and primes just below ``M``.

All window decisions are certified: ``q >= N^theta`` is the integer
inequality ``q^den >= N^num`` and the other sides go through
:func:`shortdiv.hpreal.compare`.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from typing import Callable

import gmpy2
from mpmath import mp, mpf, nstr, sqrt

from .arith import FactoredInteger, factorize, is_prime, primes_above
from .hpreal import HighPrecisionReal, compare, const, log, root_power, to_fraction

DECIMAL_DIGITS = 30


class WitnessError(RuntimeError):
    """The construction cannot be carried out for these parameters."""


def choose_s_r(theta, epsilon) -> tuple[int, int, bool]:
    """``(s, r, edge)``: subset size rule; ``edge`` marks ``{theta s} = 0``.

    ``s = floor(1/epsilon - 3/(2 theta))``; ``r = ceil(theta s)`` when the
    fractional part of ``theta s`` lies in ``(0, 1/2]`` and one more
    otherwise (including a zero fractional part).
    """
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    if not 0 < theta <= Fraction(1, 2):
        raise ValueError(f"packing needs 0 < theta <= 1/2 (got {theta}); use the large-theta mirror")
    if not 0 < epsilon <= theta / 2:
        raise ValueError(f"packing needs 0 < epsilon <= theta/2 (got {epsilon}); use prop4_witness")
    s = math.floor(1 / epsilon - 3 / (2 * theta))
    ts = theta * s
    frac = ts - math.floor(ts)
    edge = frac == 0
    r = math.ceil(ts) if 0 < frac <= Fraction(1, 2) else math.ceil(ts) + 1
    if r > s:
        raise ValueError(f"r = {r} exceeds s = {s}")
    # r/theta < s + 3/(2 theta), i.e. r < theta s + 3/2
    if not r < ts + Fraction(3, 2):
        raise AssertionError(f"r = {r} breaks r/theta < s + 3/(2 theta)")
    return s, r, edge


def _largest_true(pred: Callable[[int], bool], guess: float) -> int:
    """Largest ``v >= 1`` with ``pred(v)`` for a predicate true then false; 0 if none."""
    if not pred(1):
        return 0
    x = max(1, int(guess)) if math.isfinite(guess) else 1
    step = max(1, x >> 40)
    if pred(x):
        lo = x
        hi = x + step
        while pred(hi):
            lo, step = hi, step * 2
            hi = lo + step
    else:
        hi = x
        lo = max(1, x - step)
        while not pred(lo):
            hi, step = lo, step * 2
            lo = max(1, hi - step)
    # pred(lo) and not pred(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if pred(mid):
            lo = mid
        else:
            hi = mid
    return lo


def _in_lower(q: int, N: int, theta: Fraction) -> bool:
    # q >= N^theta  <=>  q^den >= N^num
    return q**theta.denominator >= N**theta.numerator


def _in_upper_exact(q: int, N: int, theta: Fraction) -> bool:
    # q <= N^theta
    return q**theta.denominator <= N**theta.numerator


@dataclass
class WitnessReport:
    theta: Fraction
    epsilon: Fraction
    M: int
    s: int
    r: int
    N0: FactoredInteger
    m: int
    N: FactoredInteger
    packed_count: int
    binom_target: int
    mirrored: bool = False
    edge_flag: bool = False
    checks: dict = field(default_factory=dict)
    window_lo: HighPrecisionReal | None = None
    window_hi: HighPrecisionReal | None = None

    @property
    def L(self) -> HighPrecisionReal:
        lm = log(self.M)
        return lm * lm

    @property
    def success(self) -> bool:
        return self.packed_count == self.binom_target

    def to_dict(self) -> dict:
        d = {
            "construction": "mirror" if self.mirrored else "packing",
            "theta": str(self.theta),
            "epsilon": str(self.epsilon),
            "M": str(self.M),
            "L": self.L.to_decimal(DECIMAL_DIGITS),
            "s": str(self.s),
            "r": str(self.r),
            "N0": str(self.N0.value),
            "primes": [str(p) for p in self.N0.primes],
            "m": str(self.m),
            "N": str(self.N.value),
            "window_lo": self.window_lo.to_decimal(DECIMAL_DIGITS) if self.window_lo is not None else None,
            "window_hi": self.window_hi.to_decimal(DECIMAL_DIGITS) if self.window_hi is not None else None,
            "decimal_digits": DECIMAL_DIGITS,
            "packed_count": str(self.packed_count),
            "binom_target": str(self.binom_target),
            "fractional_part_zero": self.edge_flag,
            "success": self.success,
        }
        d.update({k: (str(v) if isinstance(v, int) and not isinstance(v, bool) else v) for k, v in self.checks.items()})
        return d

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def transcript(self) -> str:
        th, ep = self.theta, self.epsilon
        lines = [
            f"theta = {th}, epsilon = {ep}, M = {self.M}, L = (log M)^2 = {self.L.to_decimal(12)}",
            f"s = floor(1/epsilon - 3/(2 theta)) = {self.s}, r = {self.r}"
            + (" (fractional part of theta*s is 0)" if self.edge_flag else ""),
            f"primes: {', '.join(str(p) for p in self.N0.primes)}",
            f"N0 = {self.N0.value}",
            f"m = {self.m} ({'smallest' if self.mirrored else 'largest'} admissible multiplier;"
            f" neighbour fails: {self.checks.get('m_extremal')})",
            f"N = m*N0 = {self.N.value}",
        ]
        if self.window_lo is not None:
            lines.append(f"window [{self.window_lo.to_decimal(20)}, {self.window_hi.to_decimal(20)}]")
        lines.append(f"products of {self.r} primes inside the window: {self.packed_count} of {self.binom_target}")
        lines.append("success" if self.success else "failure: M is not large enough for every product to fit")
        return "\n".join(lines)


def _take_primes_above(M: int, s: int, L: HighPrecisionReal) -> list[int]:
    ps = primes_above(M, s)
    if compare(ps[-1], M + L) > 0:
        raise WitnessError(f"M not sufficiently large: fewer than {s} primes in (M, M + (log M)^2]")
    return ps


def _take_primes_below(M: int, s: int, L: HighPrecisionReal) -> list[int]:
    ps: list[int] = []
    c = M
    while len(ps) < s and c >= 2:
        if is_prime(c):
            ps.append(c)
        c -= 1
    if len(ps) < s or compare(ps[-1], M - L) < 0:
        raise WitnessError(f"M not sufficiently large: fewer than {s} primes in [M - (log M)^2, M]")
    return sorted(ps)


def build_witness(theta, epsilon, M: int) -> WitnessReport:
    """Packing construction for ``theta <= 1/2``; success is reported, not assumed."""
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    M = int(M)
    if M < 3:
        raise ValueError("M must be at least 3")
    s, r, edge = choose_s_r(theta, epsilon)
    lm = log(M)
    L = lm * lm
    ps = _take_primes_above(M, s, L)
    N0 = FactoredInteger.from_factors((p, 1) for p in ps)
    # C = 1 + theta s L (M+L)^(s-1) / M^s
    C = 1 + const(theta * s) * L * (M + L) ** (s - 1) / const(M**s)
    Mr = M**r
    MthS = root_power(M, theta * s)

    def admissible(v: int) -> bool:
        return compare(Mr, root_power(v, theta) * MthS * C) >= 0

    lmf = math.log(M)
    Cf = 1 + float(theta * s) * lmf**2 * (M + lmf**2) ** (s - 1) / float(M) ** s
    guess = math.exp((r * lmf - float(theta * s) * lmf - math.log(Cf)) / float(theta))
    m = _largest_true(admissible, guess)
    if m == 0:
        raise WitnessError("window construction degenerate: no multiplier v >= 1 is admissible")
    N = FactoredInteger.from_factors(_merge_factors(N0.factors, _factor_small(m)))
    lo = root_power(N.value, theta)
    hi = lo + root_power(N.value, theta - epsilon)
    count = 0
    size_ok = True
    ML_r = (M + L) ** r
    for combo in combinations(ps, r):
        q = math.prod(combo)
        if _in_lower(q, N.value, theta) and compare(q, hi) <= 0:
            count += 1
        if not (Mr <= q and compare(q, ML_r) <= 0):
            size_ok = False
    checks = {
        "m_admissible": admissible(m),
        "m_extremal": not admissible(m + 1),
        "int_size": size_ok,
        "r_over_theta_bound": r < theta * s + Fraction(3, 2),
    }
    return WitnessReport(
        theta, epsilon, M, s, r, N0, m, N, count, math.comb(s, r), False, edge, checks, lo, hi
    )


def _factor_small(m: int):
    return factorize(m).factors


def _merge_factors(*parts):
    acc: dict[int, int] = {}
    for fs in parts:
        for p, e in fs:
            acc[p] = acc.get(p, 0) + e
    return sorted(acc.items())


@dataclass
class Prop4Witness:
    theta: Fraction
    epsilon: Fraction
    m: int
    n0: int
    divisor: int
    checks: dict = field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(v for v in self.checks.values() if isinstance(v, bool))

    def to_dict(self) -> dict:
        return {
            "construction": "single-divisor",
            "theta": str(self.theta),
            "epsilon": str(self.epsilon),
            "m": str(self.m),
            "n0": str(self.n0),
            "divisor": str(self.divisor),
            **self.checks,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def transcript(self) -> str:
        lines = [f"theta = {self.theta}, epsilon = {self.epsilon}, m = {self.m}", f"n0 = {self.n0}, divisor = {self.divisor}"]
        lines += [f"{k}: {v}" for k, v in self.checks.items()]
        return "\n".join(lines)


def prop4_witness(theta, epsilon, m: int) -> Prop4Witness:
    """An ``n0`` with one divisor in ``[n0^theta, n0^theta + n0^(theta - epsilon)]``.

    For ``theta <= 1/2`` the divisor is ``m`` itself; above 1/2 it is
    ``n1/m`` for a multiple ``n1`` of ``m`` just past ``m^(1/(1-theta))``.
    """
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    m = int(m)
    if not 0 < theta < 1 or not 0 < epsilon < theta:
        raise ValueError("need 0 < epsilon < theta < 1")
    if m < 1:
        raise ValueError("m must be positive")
    if theta <= Fraction(1, 2):
        a, q = theta.numerator, theta.denominator
        # smallest v with m < v^theta, i.e. v^a > m^q
        v = int(gmpy2.iroot(gmpy2.mpz(m) ** q, a)[0]) + 1
        n0 = m * ((v - 1) // m)
        if n0 < 1:
            raise WitnessError(f"m = {m} too small: no multiple of m in [v - m, v - 1] with v = {v}")
        x = root_power(n0, theta)
        chain = x + const(Fraction(11, 10) * theta) * root_power(n0, 2 * theta - 1)
        checks = {
            "v": str(v),
            "lower": n0**a <= m**q,
            "proof_chain": compare(m, chain) <= 0,
            "in_window": n0**a <= m**q and compare(m, x + root_power(n0, theta - epsilon)) <= 0,
        }
        w = Prop4Witness(theta, epsilon, m, n0, m, checks)
        if not checks["proof_chain"]:
            raise WitnessError(f"m = {m} too small: m <= n0^theta + 1.1 theta n0^(2 theta - 1) fails")
        return w
    tp = 1 - theta
    a, q = tp.numerator, tp.denominator
    # smallest v with v^(1-theta) >= m, then the first multiple of m from v on
    root, exact = gmpy2.iroot(gmpy2.mpz(m) ** q, a)
    v = int(root) if exact else int(root) + 1
    n1 = m * (-(-v // m))
    d = n1 // m
    x = root_power(n1, theta)
    checks = {
        "v": str(v),
        "mirror_lower": compare(root_power(n1, tp) - const(Fraction(11, 10) * tp) * root_power(n1, 1 - 2 * theta), m) <= 0,
        "mirror_upper": m**q <= n1**a,
        "lower": d**theta.denominator >= n1**theta.numerator,
        "proof_chain": compare(d, x + const(Fraction(6, 5) * tp)) <= 0,
        "in_window": d**theta.denominator >= n1**theta.numerator
        and compare(d, x + root_power(n1, theta - epsilon)) <= 0,
    }
    if not (checks["mirror_lower"] and checks["proof_chain"]):
        raise WitnessError(f"m = {m} too small: the complementary divisor chain fails")
    return Prop4Witness(theta, epsilon, m, n1, d, checks)


def build_witness_large_theta(theta, epsilon, M: int) -> WitnessReport | Prop4Witness:
    """Mirror construction with ``1 - theta``; falls back to one divisor when epsilon is large."""
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    M = int(M)
    if not Fraction(1, 2) <= theta < 1 or not 0 < epsilon < theta:
        raise ValueError("large-theta construction needs 1/2 <= theta < 1 and 0 < epsilon < theta")
    tp = 1 - theta
    if epsilon >= tp or epsilon > tp / 2:
        return prop4_witness(theta, epsilon, M)
    if M < 3:
        raise ValueError("M must be at least 3")
    s, r, edge = choose_s_r(tp, epsilon)
    lm = log(M)
    L = lm * lm
    ps = _take_primes_below(M, s, L)
    N1 = FactoredInteger.from_factors((p, 1) for p in ps)
    Mr = M**r
    MtS = root_power(M, tp * s)
    shrink = 1 - const(s) * L / M
    if compare(shrink, 0) <= 0:
        raise WitnessError("M not sufficiently large: s L >= M")
    num, den = theta.numerator, theta.denominator
    shrink_pow = shrink**num

    def admissible(v: int) -> bool:
        # M^r <= v^tp M^(tp s) (1 - tp s L / (M (1 - sL/M)^theta)); with
        # g = 1 - M^r / (v^tp M^(tp s)) this is (tp s L / (M g))^den <= (1 - sL/M)^num
        base = root_power(v, tp) * MtS
        g = 1 - const(Mr) / base
        if compare(g, 0) <= 0:
            return False
        return compare((const(tp * s) * L / (const(M) * g)) ** den, shrink_pow) <= 0

    lmf = math.log(M)
    Lf = lmf * lmf
    Cf = 1 - float(tp * s) * Lf / (M * (1 - s * Lf / M) ** float(theta))
    guess = math.exp((r * lmf - float(tp * s) * lmf - math.log(Cf)) / float(tp)) if Cf > 0 else math.inf
    m = _largest_true(lambda v: not admissible(v), guess) + 1
    N = FactoredInteger.from_factors(_merge_factors(N1.factors, _factor_small(m)))
    Nv = N.value
    top = root_power(Nv, tp)
    bottom = top - const(Fraction(1, 2)) * root_power(Nv, tp - epsilon)
    count = 0
    comp_12 = 0
    comp_window = 0
    size_ok = True
    ML_r = (M - L) ** r
    big_lo = root_power(Nv, theta)
    big_hi12 = big_lo + const(Fraction(6, 5)) * root_power(Nv, theta - epsilon)
    big_hi = big_lo + root_power(Nv, theta - epsilon)
    for combo in combinations(ps, r):
        q = math.prod(combo)
        if _in_upper_exact(q, Nv, tp) and compare(q, bottom) >= 0:
            count += 1
            c = Nv // q
            if _in_lower(c, Nv, theta):
                comp_12 += compare(c, big_hi12) <= 0
                comp_window += compare(c, big_hi) <= 0
        if not (compare(ML_r, q) <= 0 and q <= Mr):
            size_ok = False
    checks = {
        "m_admissible": admissible(m),
        "m_extremal": m == 1 or not admissible(m - 1),
        "int_size": size_ok,
        "r_over_theta_bound": r < tp * s + Fraction(3, 2),
        "complement_within_1_2": comp_12,
        "complement_in_window": comp_window,
    }
    return WitnessReport(theta, epsilon, M, s, r, N1, m, N, count, math.comb(s, r), True, edge, checks, bottom, top)


def stirling_diagnostic(s: int, r: int, theta, epsilon) -> tuple[int, str]:
    """``binom(s, r)`` beside ``sqrt(epsilon theta^3) (theta^-theta (1-theta)^-(1-theta))^(1/epsilon)``.

    Informational only: the implied constant is unknown.
    """
    if not 0 <= r <= s:
        raise ValueError("need 0 <= r <= s")
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    with mp.workprec(128):
        th = mpf(theta.numerator) / theta.denominator
        ep = mpf(epsilon.numerator) / epsilon.denominator
        val = sqrt(ep * th**3) * (th ** (-th) * (1 - th) ** (th - 1)) ** (1 / ep)
        closed = nstr(val, 20)
    return math.comb(s, r), closed
