"""Exact integer arithmetic: factorizations, divisors and prime generation."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator

import numpy as np
from sympy import factorint
from sympy.ntheory.primetest import isprime as _bpsw_isprime

DEFAULT_DIVISOR_BUDGET = 1 << 20
DEFAULT_FACTOR_BITS = 200


class ResourceLimitError(RuntimeError):
    """An input exceeds a configured size budget."""


@dataclass(frozen=True)
class FactoredInteger:
    """A positive integer together with its prime factorization."""

    value: int
    factors: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if self.value < 1:
            raise ValueError("FactoredInteger needs value >= 1")
        prod = 1
        last = 1
        for p, e in self.factors:
            if p <= last or e < 1:
                raise ValueError(f"malformed factorization {self.factors!r}")
            last = p
            prod *= p**e
        if prod != self.value:
            raise ValueError(f"factors {self.factors!r} do not multiply to {self.value}")

    @classmethod
    def from_factors(cls, factors: Iterable[tuple[int, int]]) -> FactoredInteger:
        fs = tuple(sorted((int(p), int(e)) for p, e in factors if e))
        return cls(math.prod(p**e for p, e in fs), fs)

    @property
    def primes(self) -> tuple[int, ...]:
        return tuple(p for p, _ in self.factors)

    @property
    def exponents(self) -> tuple[int, ...]:
        return tuple(e for _, e in self.factors)

    def __int__(self) -> int:
        return self.value

    def __str__(self) -> str:
        if not self.factors:
            return "1"
        return "·".join(f"{p}^{e}" if e > 1 else str(p) for p, e in self.factors)


@dataclass(frozen=True)
class ArithProfile:
    tau: int
    omega: int
    big_omega2: int
    v_max: int


def factorize(n: int, max_bits: int = DEFAULT_FACTOR_BITS) -> FactoredInteger:
    """Full prime factorization of ``n >= 1``."""
    n = int(n)
    if n < 1:
        raise ValueError(f"cannot factor {n}")
    if n.bit_length() > max_bits:
        raise ResourceLimitError(
            f"{n.bit_length()}-bit input exceeds the factorization budget of {max_bits} bits"
        )
    if n == 1:
        return FactoredInteger(1, ())
    return FactoredInteger(n, tuple(sorted(factorint(n).items())))


def as_factored(n) -> FactoredInteger:
    return n if isinstance(n, FactoredInteger) else factorize(n)


def divisor_count(n) -> int:
    return math.prod(e + 1 for _, e in as_factored(n).factors)


def divisors(n, budget: int = DEFAULT_DIVISOR_BUDGET) -> list[int]:
    """All divisors of ``n`` in increasing order."""
    n = as_factored(n)
    tau = divisor_count(n)
    if tau > budget:
        raise ResourceLimitError(f"tau(n) = {tau} exceeds the enumeration budget {budget}")
    divs = [1]
    for p, e in n.factors:
        ladders = []
        pk = 1
        for _ in range(e + 1):
            ladders.append([d * pk for d in divs])
            pk *= p
        divs = list(heapq.merge(*ladders))
    return divs


def profile(n) -> ArithProfile:
    return _profile(as_factored(n))


@lru_cache(maxsize=1024)
def _profile(n: FactoredInteger) -> ArithProfile:
    exps = n.exponents
    return ArithProfile(
        tau=math.prod(e + 1 for e in exps),
        omega=len(exps),
        big_omega2=sum(e * e for e in exps),
        v_max=max(exps, default=0),
    )


# -- primes -------------------------------------------------------------------

_MR_BASES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41)
# the bases above are a proven deterministic witness set below this bound
_MR_DETERMINISTIC_LIMIT = 3317044064679887385961981


def is_prime(n: int) -> bool:
    """Primality; deterministic Miller-Rabin below 3.3e24, BPSW above."""
    if n < 2:
        return False
    for p in _MR_BASES:
        if n % p == 0:
            return n == p
    if n >= _MR_DETERMINISTIC_LIMIT:
        return bool(_bpsw_isprime(n))
    d = n - 1
    s = 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_BASES:
        x = pow(a, d, n)
        if x == 1 or x == n - 1:
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def primes_above(M: int, count: int) -> list[int]:
    """The ``count`` smallest primes strictly greater than ``M``."""
    if M < 2:
        raise ValueError("primes_above needs M >= 2")
    out: list[int] = []
    c = M + 1
    while len(out) < count:
        if is_prime(c):
            out.append(c)
        c += 1
    return out


def primes_in(lo: int, hi: int) -> Iterator[int]:
    """Primes in the closed interval ``[lo, hi]``, ascending."""
    for c in range(max(lo, 2), hi + 1):
        if is_prime(c):
            yield c


def prime_sieve(limit: int) -> np.ndarray:
    """Boolean primality table for ``0..limit``."""
    flags = np.ones(limit + 1, dtype=bool)
    flags[:2] = False
    for p in range(2, math.isqrt(limit) + 1):
        if flags[p]:
            flags[p * p :: p] = False
    return flags


def segmented_primes(lo: int, hi: int) -> list[int]:
    """Primes in ``[lo, hi]`` by a segmented sieve of Eratosthenes."""
    lo = max(lo, 2)
    if hi < lo:
        return []
    base = np.flatnonzero(prime_sieve(math.isqrt(hi)))
    seg = np.ones(hi - lo + 1, dtype=bool)
    for p in base.tolist():
        start = max(p * p, (lo + p - 1) // p * p)
        seg[start - lo :: p] = False
    return (np.flatnonzero(seg) + lo).tolist()


def smallest_prime_factor_table(limit: int) -> np.ndarray:
    spf = np.zeros(limit + 1, dtype=np.int64)
    for p in range(2, limit + 1):
        if spf[p] == 0:
            spf[p] = p
            if p * p <= limit:
                block = spf[p * p :: p]
                block[block == 0] = p
    return spf


def factor_range(limit: int, start: int = 1) -> Iterator[FactoredInteger]:
    """Factorizations of ``start..limit`` from a smallest-prime-factor table."""
    spf = smallest_prime_factor_table(limit).tolist()
    for n in range(max(start, 1), limit + 1):
        fs = []
        m = n
        while m > 1:
            p = spf[m]
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            fs.append((p, e))
        yield FactoredInteger(n, tuple(fs))
