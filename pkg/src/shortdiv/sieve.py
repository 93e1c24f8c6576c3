"""Large-sieve bound for divisors just above ``x0 = sqrt(a n / b)``.

For a divisor ``d`` of ``n`` put ``f(d) = a n/d + b d`` and
``f*(d) = a n/d - b d``.  Then ``f(d)^2 - 4abn = f*(d)^2`` is a square, so
modulo every odd prime power ``p^(v+1)`` with ``v = v_p(4abn)`` the value
``f(d)`` avoids the residues ``x`` for which ``x^2 - 4abn`` is not a square.
Divisors in ``[x0, x0 + sqrt(i x0 / b)]`` have distinct ``f`` values lying in
an interval of ``i + 1`` integers, which the large sieve then bounds.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .arith import ResourceLimitError, as_factored, divisors, factorize, is_prime, primes_in
from .hpreal import compare, root_power
from .window import count_between

BRUTEFORCE_LIMIT = 10**6


def legendre(a: int, p: int) -> int:
    """Legendre symbol (a|p) for an odd prime p, by Euler's criterion."""
    r = pow(a % p, (p - 1) // 2, p)
    return -1 if r == p - 1 else r


def _check_odd_prime_unit(p: int, u: int) -> None:
    if p < 3 or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"p must be an odd prime, got {p}")
    if u % p == 0:
        raise ValueError(f"u must be coprime to p, got u={u}, p={p}")


def count_unsolvable(p: int, v: int, u: int) -> int:
    """Residues x mod p^(v+1) with x^2 + p^v u = y^2 (mod p^(v+1)) unsolvable in y.

    Closed form: ``(p - (-u|p))/2`` for v = 0, ``p`` for v = 1, and ``p``
    times the count for ``v - 2`` above that.
    """
    _check_odd_prime_unit(p, u)
    if v < 0:
        raise ValueError("v must be non-negative")
    scale = p ** (v // 2)
    if v % 2:
        return scale * p
    return scale * (p - legendre(-u, p)) // 2


def unsolvable_bruteforce(p: int, v: int, u: int) -> int:
    """Same count by direct enumeration of squares mod p^(v+1)."""
    _check_odd_prime_unit(p, u)
    if v < 0:
        raise ValueError("v must be non-negative")
    m = p ** (v + 1)
    if m > BRUTEFORCE_LIMIT:
        raise ResourceLimitError(f"p^(v+1) = {m} exceeds the enumeration budget {BRUTEFORCE_LIMIT}")
    xs = np.arange(m, dtype=np.int64)
    sq = xs * xs % m
    is_square = np.zeros(m, dtype=bool)
    is_square[sq] = True
    shifted = (sq + (p**v * u) % m) % m
    return int(np.count_nonzero(~is_square[shifted]))


def is_square_mod_prime_power(c: int, p: int, k: int) -> bool:
    """Whether ``y^2 = c (mod p^k)`` has a solution, p odd."""
    m = p**k
    c %= m
    if c == 0:
        return True
    j = 0
    while c % p == 0:
        c //= p
        j += 1
    return j % 2 == 0 and legendre(c, p) == 1


def f_values(n, a: int, b: int, d: int) -> tuple[int, int]:
    """``(a n/d + b d, a n/d - b d)``; their squares differ by exactly 4abn."""
    n = as_factored(n)
    if d < 1 or n.value % d:
        raise ValueError(f"{d} does not divide {n.value}")
    if a < 1 or b < 1 or math.gcd(a, b) != 1:
        raise ValueError("a and b must be coprime positive integers")
    c = a * (n.value // d)
    f, fs = c + b * d, c - b * d
    assert f * f - fs * fs == 4 * a * b * n.value
    return f, fs


@dataclass(frozen=True)
class Modulus:
    prime: int
    v: int  # v_p(4abn); the modulus is prime^(v+1)
    excluded: int
    unit: int  # -4abn / p^v reduced mod p

    @property
    def modulus(self) -> int:
        return self.prime ** (self.v + 1)

    @property
    def weight(self) -> Fraction:
        return Fraction(self.excluded, self.modulus - self.excluded)


@dataclass(frozen=True)
class SieveSpec:
    moduli: tuple[Modulus, ...]
    Q: int
    H: Fraction = field(init=False)

    def __post_init__(self) -> None:
        if self.Q < 1:
            raise ValueError("Q must be >= 1")
        for m in self.moduli:
            if m.prime % 2 == 0 or not 0 <= m.excluded < m.modulus:
                raise ValueError(f"bad modulus entry {m}")
        if len({m.prime for m in self.moduli}) != len(self.moduli):
            raise ValueError("moduli must be powers of distinct primes")
        object.__setattr__(self, "H", _total_weight(self.moduli, self.Q))

    @classmethod
    def from_pairs(cls, pairs, Q: int) -> SieveSpec:
        """Spec from ``(prime_power, excluded_count)`` pairs."""
        mods = []
        for q, k in pairs:
            p = _prime_of_power(q)
            mods.append(Modulus(p, _valuation(q, p) - 1, k, 0))
        return cls(tuple(mods), Q)


def _valuation(x: int, p: int) -> int:
    v = 0
    while x % p == 0:
        x //= p
        v += 1
    return v


def _prime_of_power(q: int) -> int:
    fs = factorize(q).factors
    if len(fs) != 1:
        raise ValueError(f"{q} is not a prime power")
    return fs[0][0]


def _total_weight(moduli: tuple[Modulus, ...], Q: int) -> Fraction:
    # sum of h(q) over q <= Q: products of distinct moduli, each with its weight
    mods = sorted(moduli, key=lambda m: m.modulus)
    total = Fraction(0)

    def walk(start: int, q: int, h: Fraction) -> None:
        nonlocal total
        total += h
        for j in range(start, len(mods)):
            nq = q * mods[j].modulus
            if nq > Q:
                break
            walk(j + 1, nq, h * mods[j].weight)

    walk(0, 1, Fraction(1))
    return total


def build_sieve_spec(n, a: int, b: int, Q: int) -> SieveSpec:
    """Moduli ``p^(v_p(4abn)+1)`` for the odd primes ``p <= Q``."""
    n = as_factored(n)
    if math.gcd(a, b) != 1:
        raise ValueError("a and b must be coprime")
    c = 4 * a * b * n.value
    mods = []
    for p in primes_in(3, Q):
        v = _valuation(c, p)
        u = (-c // p**v) % p
        mods.append(Modulus(p, v, count_unsolvable(p, v, u), u))
    return SieveSpec(tuple(mods), Q)


def weight_h(spec: SieveSpec, q: int) -> Fraction:
    """Multiplicative weight; zero unless q is a product of distinct moduli."""
    if q < 1:
        raise ValueError("q must be positive")
    by_prime = {m.prime: m for m in spec.moduli}
    h = Fraction(1)
    for p, e in factorize(q).factors:
        m = by_prime.get(p)
        if m is None or m.v + 1 != e:
            return Fraction(0)
        h *= m.weight
    return h


def large_sieve_bound(spec: SieveSpec, N) -> Fraction | float:
    """``(N + Q^2)/H``; ``inf`` when H vanishes."""
    if spec.H == 0:
        return math.inf
    return (Fraction(N) + spec.Q * spec.Q) / spec.H


@dataclass
class SieveReport:
    n: int
    a: int
    b: int
    i: int
    spec: SieveSpec
    count: int
    avoids: bool
    injective: bool

    @property
    def cap_elementary(self) -> int:
        return self.i + 1

    @property
    def cap_sieve(self):
        return large_sieve_bound(self.spec, self.i + 1)

    @property
    def ok(self) -> bool:
        return self.avoids and self.injective and self.count <= self.cap_elementary and self.count <= self.cap_sieve

    def to_dict(self) -> dict:
        cap = self.cap_sieve
        return {
            "n": str(self.n),
            "a": str(self.a),
            "b": str(self.b),
            "i": str(self.i),
            "count": self.count,
            "cap_elementary": self.cap_elementary,
            "cap_sieve": "inf" if cap == math.inf else str(cap),
            "cap_sieve_float": "inf" if cap == math.inf else repr(float(cap)),
            "Q": self.spec.Q,
            "H": str(self.spec.H),
            "moduli": [
                {"modulus": m.modulus, "excluded": m.excluded, "legendre": legendre(-m.unit, m.prime) if m.v % 2 == 0 else 0}
                for m in self.spec.moduli
            ],
            "avoids_excluded_classes": self.avoids,
            "f_injective": self.injective,
            "ok": self.ok,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)


def sieve_window_check(n, a: int, b: int, i: int, Q: int) -> SieveReport:
    """Count divisors in ``[x0, x0 + sqrt(i x0 / b)]`` and compare with both caps."""
    n = as_factored(n)
    if a < 1 or b < 1 or math.gcd(a, b) != 1:
        raise ValueError("a and b must be coprime positive integers")
    if i < 1 or Q < 1:
        raise ValueError("i and Q must be positive")
    spec = build_sieve_spec(n, a, b, Q)
    x0 = root_power(Fraction(a * n.value, b), Fraction(1, 2))
    # sqrt(i x0 / b) = (i^2 a n / b^3)^(1/4)
    hi = x0 + root_power(Fraction(i * i * a * n.value, b**3), Fraction(1, 4))
    divs = divisors(n)
    count = count_between(divs, x0, hi)
    c = 4 * a * b * n.value
    fs = []
    avoids = True
    for d in divs:
        if compare(d, x0) < 0:
            continue
        f, _ = f_values(n, a, b, d)
        fs.append(f)
        for m in spec.moduli:
            if not is_square_mod_prime_power(f * f - c, m.prime, m.v + 1):
                avoids = False
    injective = len(set(fs)) == len(fs)
    return SieveReport(n.value, a, b, i, spec, count, avoids, injective)


def sieve_bound_scan(n, a: int, b: int, i: int, Q_max: int) -> list[tuple[int, Fraction, Fraction | float]]:
    """``(Q, H, (i + 1 + Q^2)/H)`` for ``Q = 1..Q_max``; H never decreases in Q."""
    full = build_sieve_spec(as_factored(n), a, b, Q_max)
    out = []
    for Q in range(1, Q_max + 1):
        spec = SieveSpec(tuple(m for m in full.moduli if m.prime <= Q), Q)
        out.append((Q, spec.H, large_sieve_bound(spec, i + 1)))
    return out
