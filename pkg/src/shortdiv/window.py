"""Counting divisors of ``n`` in a closed window ``[X, X + Y]``."""

from __future__ import annotations

import csv
import io
import math
from bisect import bisect_left, bisect_right
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .arith import (
    DEFAULT_DIVISOR_BUDGET,
    FactoredInteger,
    ResourceLimitError,
    as_factored,
    divisors,
)
from .hpreal import HighPrecisionReal, _ULP, compare, const, lift, root_power, to_fraction

# relative guard band for the vectorised float pre-classification
TABLE_GUARD = 2.0**-30
TABLE_LIMIT = 2_000_000


@dataclass(frozen=True)
class ExponentWindow:
    """Either ``X = n**theta, Y = n**eta`` or absolute ``X, Y``."""

    theta: Fraction | None = None
    eta: Fraction | None = None
    X: HighPrecisionReal | None = None
    Y: HighPrecisionReal | None = None

    @classmethod
    def exponents(cls, theta, eta) -> ExponentWindow:
        theta, eta = to_fraction(theta), to_fraction(eta)
        if not 0 < theta < 1:
            raise ValueError(f"theta must lie in (0, 1), got {theta}")
        if eta <= 0:
            raise ValueError(f"eta must be positive, got {eta}")
        return cls(theta=theta, eta=eta)

    @classmethod
    def absolute(cls, X, Y) -> ExponentWindow:
        X, Y = lift(X), lift(Y)
        if compare(X, 0) <= 0:
            raise ValueError("window start X must be positive")
        if compare(Y, 0) < 0:
            raise ValueError("window length Y must be non-negative")
        return cls(X=X, Y=Y)

    @property
    def is_exponent_form(self) -> bool:
        return self.theta is not None

    def endpoints(self, n: int) -> tuple[HighPrecisionReal, HighPrecisionReal]:
        if self.is_exponent_form:
            lo = root_power(n, self.theta)
            return lo, lo + root_power(n, self.eta)
        return self.X, self.X + self.Y


def _first_at_least(divs: Sequence[int], x: HighPrecisionReal, strict: bool) -> int:
    """Index of the first ``d`` with ``d >= x`` (``d > x`` when strict)."""
    f = x.fast()
    if f is not None:
        v, e = f
        margin = 2 * e + 4 * _ULP * abs(v) + 1e-300
        i = bisect_left(divs, v - margin)
        j = bisect_right(divs, v + margin)
    else:
        i, j = 0, len(divs)
    # divisors in [i, j) are too close to call by floats; certify them
    while i < j:
        mid = (i + j) // 2
        c = compare(divs[mid], x)
        if c > 0 or (c == 0 and not strict):
            j = mid
        else:
            i = mid + 1
    return i


def count_between(divs: Sequence[int], lo: HighPrecisionReal, hi: HighPrecisionReal) -> int:
    """Number of ``d`` in sorted ``divs`` with ``lo <= d <= hi``."""
    a = _first_at_least(divs, lo, strict=False)
    b = _first_at_least(divs, hi, strict=True)
    return max(0, b - a)


def count_window(n, w: ExponentWindow, budget: int = DEFAULT_DIVISOR_BUDGET) -> int:
    """D_n(X, Y): divisors ``d`` of ``n`` with ``X <= d <= X + Y``."""
    n = as_factored(n)
    lo, hi = w.endpoints(n.value)
    return count_between(divisors(n, budget), lo, hi)


def reflection_check(n, X, Y) -> bool:
    """Check D_n(X, Y) = D_n(n/(X+Y), Yn/(X(X+Y))) by two separate counts."""
    n = as_factored(n)
    X, Y = to_fraction(X), to_fraction(Y)
    if X <= 0 or Y < 0:
        raise ValueError("reflection needs X > 0 and Y >= 0")
    divs = divisors(n)
    left = count_between(divs, const(X), const(X + Y))
    X2 = n.value / (X + Y)
    Y2 = Y * n.value / (X * (X + Y))
    right = count_between(divs, const(X2), const(X2 + Y2))
    return left == right


def gap_check(n) -> bool:
    """Consecutive divisors ``d < d + h`` with ``d >= sqrt(n)`` satisfy ``h > d^2/n``."""
    n = as_factored(n)
    N = n.value
    divs = divisors(n)
    for d, nxt in zip(divs, divs[1:]):
        if d * d >= N and (nxt - d) * N <= d * d:
            return False
    return True


# -- bulk counting ---------------------------------------------------------


class DivisorTable:
    """All (n, d) pairs with ``d | n`` and ``n <= limit`` as flat arrays."""

    def __init__(self, limit: int) -> None:
        if limit > TABLE_LIMIT:
            raise ResourceLimitError(f"divisor table limit {limit} exceeds {TABLE_LIMIT}")
        self.limit = limit
        owners, divs = [], []
        for d in range(1, math.isqrt(limit) + 1):
            ks = np.arange(d, limit // d + 1, dtype=np.int64)
            own = d * ks
            owners.append(own)
            divs.append(np.full(ks.shape, d, dtype=np.int64))
            owners.append(own[1:])
            divs.append(ks[1:])
        self.owner = np.concatenate(owners).astype(np.int32)
        self.div = np.concatenate(divs).astype(np.int32)

    def window_counts(self, theta, eta, chunk: int = 1 << 21) -> np.ndarray:
        """``counts[n] = D_n(n**theta, n**eta)`` for ``1 <= n <= limit``."""
        theta, eta = to_fraction(theta), to_fraction(eta)
        ns = np.arange(self.limit + 1, dtype=np.float64)
        lo_n = ns ** float(theta)
        hi_n = lo_n + ns ** float(eta)
        counts = np.zeros(self.limit + 1, dtype=np.int64)
        g = TABLE_GUARD
        for s in range(0, self.owner.size, chunk):
            own = self.owner[s : s + chunk]
            d = self.div[s : s + chunk].astype(np.float64)
            lo = lo_n[own]
            hi = hi_n[own]
            sure = (d > lo * (1 + g)) & (d < hi * (1 - g))
            out = (d < lo * (1 - g)) | (d > hi * (1 + g))
            counts += np.bincount(own[sure], minlength=self.limit + 1)
            amb = np.flatnonzero(~sure & ~out)
            for k in amb.tolist():
                n = int(own[k])
                dv = int(self.div[s + k])
                lo_x = root_power(n, theta)
                if compare(dv, lo_x) >= 0 and compare(dv, lo_x + root_power(n, eta)) <= 0:
                    counts[n] += 1
        counts[0] = 0
        return counts


# -- conjecture scan -------------------------------------------------------


@dataclass
class ScanResult:
    theta: str
    epsilon: str
    rows: list[tuple[int, int]] = field(default_factory=list)
    errors: list[tuple[int, str]] = field(default_factory=list)

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "count", "theta", "epsilon"])
        for n, c in self.rows:
            w.writerow([str(n), str(c), self.theta, self.epsilon])
        return buf.getvalue()

    def to_dict(self) -> dict:
        return {
            "theta": self.theta,
            "epsilon": self.epsilon,
            "maxima": [{"n": str(n), "count": str(c)} for n, c in self.rows],
            "errors": [{"n": str(n), "error": msg} for n, msg in self.errors],
        }


def _scan_counts(ns: list[int], theta: Fraction, eta: Fraction, budget: int):
    w = ExponentWindow.exponents(theta, eta)
    out = []
    for n in ns:
        try:
            out.append((n, count_window(n, w, budget), None))
        except (ResourceLimitError, ArithmeticError, ValueError) as exc:
            out.append((n, None, f"{type(exc).__name__}: {exc}"))
    return out


def conjecture_scan(
    ns: Iterable[int],
    theta,
    epsilon,
    jobs: int = 1,
    budget: int = DEFAULT_DIVISOR_BUDGET,
) -> ScanResult:
    """Running maxima of D_n(n**theta, n**(theta - epsilon)) over ``ns``."""
    theta_s, eps_s = str(theta), str(epsilon)
    th, ep = to_fraction(theta), to_fraction(epsilon)
    if not 0 < ep < th < 1:
        raise ValueError("scan needs 0 < epsilon < theta < 1")
    eta = th - ep
    if isinstance(ns, range) and ns.step == 1 and ns.start >= 1 and 0 < ns.stop - 1 <= TABLE_LIMIT:
        counts = DivisorTable(ns.stop - 1).window_counts(th, eta)
        per_n = [(n, int(counts[n]), None) for n in ns]
    else:
        nl = sorted(set(int(n) for n in ns))
        if jobs > 1 and len(nl) > 1:
            size = -(-len(nl) // jobs)
            parts = [nl[i : i + size] for i in range(0, len(nl), size)]
            with ProcessPoolExecutor(jobs) as ex:
                chunks = ex.map(_scan_counts, parts, [th] * len(parts), [eta] * len(parts), [budget] * len(parts))
                per_n = [r for c in chunks for r in c]
        else:
            per_n = _scan_counts(nl, th, eta, budget)
    res = ScanResult(theta_s, eps_s)
    best = -1
    for n, c, err in per_n:
        if err is not None:
            res.errors.append((n, err))
        elif c > best:
            best = c
            res.rows.append((n, c))
    return res
