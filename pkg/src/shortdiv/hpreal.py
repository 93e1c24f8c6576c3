"""Certified comparison of real numbers.

A :class:`HighPrecisionReal` is a lazy expression tree over exact
rationals, rational powers of rationals and natural logarithms of
integers.  Each node can produce

* a fast float approximation with a tracked error bound,
* its exact rational value when the value is provably rational,
* a rigorous enclosure ``[lo, hi]`` (pair of :class:`Fraction`) at any
  requested working precision.

:func:`compare` tries those three in order and escalates the precision
of the enclosures (doubling from :data:`DEFAULT_PREC` up to
:data:`MAX_PREC`) until the two sides separate.  A decision, once made,
is never revised at a higher precision because every enclosure contains
the true value.
"""

from __future__ import annotations

import math
import os
from contextlib import contextmanager
from fractions import Fraction
from numbers import Rational

import gmpy2
from mpmath import iv, mp, mpf, nstr

DEFAULT_PREC = int(os.environ.get("SHORTDIV_PRECISION_BITS", "128"))
MAX_PREC = 4096

# relative error charged per libm call (log/exp) on the fast path; far above
# the <1 ulp libm actually delivers
_REL_LIBM = 2.0**-40
_ULP = 2.0**-52
# integer-root enclosures are used while the radicand stays below this size
_IROOT_MAX_BITS = 1 << 21

_MISSING = object()


class PrecisionExhausted(ArithmeticError):
    """Raised when a comparison is still undecided at :data:`MAX_PREC` bits."""


class _Undecided(Exception):
    pass


def to_fraction(x) -> Fraction:
    """Convert a user-supplied real to an exact rational.

    Floats are read through their shortest decimal representation, so
    ``0.4`` means ``2/5``; strings are parsed as decimals or ``p/q``.
    """
    if isinstance(x, Fraction):
        return x
    if isinstance(x, bool):
        raise TypeError("bool is not a real parameter")
    if isinstance(x, (int, Rational)):
        return Fraction(x)
    if isinstance(x, float):
        if not math.isfinite(x):
            raise ValueError(f"non-finite value {x!r}")
        return Fraction(repr(x))
    if isinstance(x, str):
        return Fraction(x.strip())
    if isinstance(x, HighPrecisionReal):
        ex = x.exact()
        if ex is None:
            raise ValueError("value is not known to be rational")
        return ex
    return Fraction(x)


def _iv_to_fractions(v) -> tuple[Fraction, Fraction]:
    lo, hi = v._mpi_
    return _mpf_to_fraction(lo), _mpf_to_fraction(hi)


def _mpf_to_fraction(t) -> Fraction:
    sign, man, exp, _ = t
    if not man and exp:
        raise _Undecided  # inf / nan endpoint
    val = int(man)
    if sign:
        val = -val
    if exp >= 0:
        return Fraction(val << exp)
    return Fraction(val, 1 << -exp)


def _iv_from_int(n: int):
    return iv.mpf(n)


@contextmanager
def _ivprec(bits: int):
    # mpmath's interval context only exposes a global precision
    saved = iv.prec
    iv.prec = bits
    try:
        yield
    finally:
        iv.prec = saved


class HighPrecisionReal:
    """Real value with certified comparisons; see the module docstring."""

    __slots__ = ("_enc", "_fast_cache", "_exact_cache")

    def __init__(self) -> None:
        self._enc: dict[int, tuple[Fraction, Fraction]] = {}
        self._fast_cache = _MISSING
        self._exact_cache = _MISSING

    # -- evaluation -------------------------------------------------------

    def enclose(self, prec: int = DEFAULT_PREC) -> tuple[Fraction, Fraction]:
        """Rigorous enclosure ``(lo, hi)`` with roughly ``prec`` bits."""
        enc = self._enc.get(prec)
        if enc is None:
            enc = self._enclose(prec)
            self._enc[prec] = enc
        return enc

    def fast(self) -> tuple[float, float] | None:
        """Float approximation ``(value, error_bound)`` or None."""
        if self._fast_cache is _MISSING:
            try:
                r = self._fast()
            except (OverflowError, ZeroDivisionError, ValueError):
                r = None
            if r is not None and not (math.isfinite(r[0]) and math.isfinite(r[1])):
                r = None
            self._fast_cache = r
        return self._fast_cache

    def exact(self) -> Fraction | None:
        """Exact rational value, or None when not provably rational."""
        if self._exact_cache is _MISSING:
            self._exact_cache = self._exact()
        return self._exact_cache

    def approx(self) -> float:
        f = self.fast()
        if f is not None:
            return f[0]
        lo, hi = self.enclose(DEFAULT_PREC)
        return float((lo + hi) / 2)

    def __float__(self) -> float:
        return self.approx()

    def to_decimal(self, digits: int = 30) -> str:
        """Decimal rendering of the certified midpoint to ``digits`` digits."""
        ex = self.exact()
        if ex is not None:
            mid = ex
        else:
            prec = max(DEFAULT_PREC, int(digits * 3.33) + 16)
            lo, hi = self.enclose(prec)
            mid = (lo + hi) / 2
        with mp.workprec(int(digits * 3.33) + 16):
            return nstr(mpf(mid.numerator) / mid.denominator, digits)

    # -- node hooks ---------------------------------------------------------

    def _enclose(self, prec: int) -> tuple[Fraction, Fraction]:
        raise NotImplementedError

    def _fast(self) -> tuple[float, float] | None:
        return None

    def _exact(self) -> Fraction | None:
        return None

    # -- arithmetic -----------------------------------------------------------

    def __add__(self, other):
        return _Add(self, lift(other))

    def __radd__(self, other):
        return _Add(lift(other), self)

    def __sub__(self, other):
        return _Add(self, _Neg(lift(other)))

    def __rsub__(self, other):
        return _Add(lift(other), _Neg(self))

    def __neg__(self):
        return _Neg(self)

    def __mul__(self, other):
        return _Mul(self, lift(other))

    def __rmul__(self, other):
        return _Mul(lift(other), self)

    def __truediv__(self, other):
        return _Div(self, lift(other))

    def __rtruediv__(self, other):
        return _Div(lift(other), self)

    def __pow__(self, k: int):
        if not isinstance(k, int) or k < 0:
            raise TypeError("only non-negative integer powers of expressions")
        return _IntPow(self, k)

    # -- comparisons ----------------------------------------------------------

    def __lt__(self, other):
        return compare(self, other) < 0

    def __le__(self, other):
        return compare(self, other) <= 0

    def __gt__(self, other):
        return compare(self, other) > 0

    def __ge__(self, other):
        return compare(self, other) >= 0

    __hash__ = object.__hash__


def lift(x) -> HighPrecisionReal:
    if isinstance(x, HighPrecisionReal):
        return x
    return _Const(to_fraction(x))


def const(x) -> HighPrecisionReal:
    """Exact constant; floats are taken as their decimal reading."""
    return _Const(to_fraction(x))


def root_power(base, exponent) -> HighPrecisionReal:
    """``base ** exponent`` for rational ``base > 0`` and rational exponent."""
    b = to_fraction(base)
    e = to_fraction(exponent)
    if b <= 0:
        raise ValueError("root_power needs a positive base")
    return _RootPow(b, e)


def log(n: int) -> HighPrecisionReal:
    """Natural logarithm of a positive integer."""
    if n < 1:
        raise ValueError("log needs a positive integer")
    return _Log(int(n))


def compare(x, y) -> int:
    """Return -1, 0 or 1 for ``x < y``, ``x == y``, ``x > y``, certified.

    Equality is only ever reported when both sides are provably rational
    and equal.
    """
    x = lift(x)
    y = lift(y)
    fx = x.fast()
    fy = y.fast()
    if fx is not None and fy is not None:
        gap = 2.0 * (fx[1] + fy[1]) + 4 * _ULP * (abs(fx[0]) + abs(fy[0]))
        if fx[0] + gap < fy[0]:
            return -1
        if fy[0] + gap < fx[0]:
            return 1
    ex = x.exact()
    if ex is not None:
        ey = y.exact()
        if ey is not None:
            return (ex > ey) - (ex < ey)
    prec = DEFAULT_PREC
    while prec <= MAX_PREC:
        try:
            xl, xh = x.enclose(prec)
            yl, yh = y.enclose(prec)
        except _Undecided:
            prec *= 2
            continue
        if xh < yl:
            return -1
        if yh < xl:
            return 1
        prec *= 2
    raise PrecisionExhausted(f"comparison undecided at {MAX_PREC} bits")


def decide(x, y, prec: int) -> int | None:
    """Single-precision attempt of :func:`compare`; None when undecided.

    Exposed for testing the stability of decisions under escalation.
    """
    x = lift(x)
    y = lift(y)
    try:
        xl, xh = x.enclose(prec)
        yl, yh = y.enclose(prec)
    except _Undecided:
        return None
    if xh < yl:
        return -1
    if yh < xl:
        return 1
    if xl == xh == yl == yh:
        return 0
    return None


# -- nodes ------------------------------------------------------------------


class _Const(HighPrecisionReal):
    __slots__ = ("v",)

    def __init__(self, v: Fraction) -> None:
        super().__init__()
        self.v = v

    def _enclose(self, prec):
        return self.v, self.v

    def _fast(self):
        f = float(self.v)
        return f, abs(f) * _ULP

    def _exact(self):
        return self.v


class _RootPow(HighPrecisionReal):
    __slots__ = ("base", "e")

    def __init__(self, base: Fraction, e: Fraction) -> None:
        super().__init__()
        self.base = base
        self.e = e

    def _exact(self):
        p, q = self.e.numerator, self.e.denominator
        if p == 0:
            return Fraction(1)
        num, den = self.base.numerator, self.base.denominator
        roots = []
        for x in (num, den):
            if x == 1:
                roots.append(1)
                continue
            if q > x.bit_length():
                return None
            r, ok = gmpy2.iroot(gmpy2.mpz(x), q)
            if not ok:
                return None
            roots.append(int(r))
        if abs(p) * max(roots[0].bit_length(), roots[1].bit_length()) > _IROOT_MAX_BITS:
            return None
        val = Fraction(roots[0], roots[1]) ** abs(p)
        return val if p > 0 else 1 / val

    def _fast(self):
        num, den = self.base.numerator, self.base.denominator
        ln = math.log(num) - math.log(den)
        ln_err = (abs(math.log(num)) + abs(math.log(den)) + 1.0) * _REL_LIBM
        x = float(self.e)
        lv = x * ln
        lv_err = abs(x) * ln_err + abs(lv) * _ULP * 2
        if lv > 700:
            return None
        v = math.exp(lv)
        return v, v * (math.expm1(lv_err) + _REL_LIBM)

    def _enclose(self, prec):
        p, q = self.e.numerator, self.e.denominator
        if p == 0:
            return Fraction(1), Fraction(1)
        num, den = self.base.numerator, self.base.denominator
        ap = abs(p)
        k = prec + 8
        radicand_bits = ap * q * max(num.bit_length(), den.bit_length()) + k * q
        if q <= 1024 and radicand_bits <= _IROOT_MAX_BITS:
            # (num/den)^(p/q) = (num^p * den^(p(q-1)))^(1/q) / den^p
            denp = den**ap
            x = num**ap * denp ** (q - 1)
            r, ok = gmpy2.iroot(gmpy2.mpz(x) << (k * q), q)
            r = int(r)
            scale = denp << k
            lo = Fraction(r, scale)
            hi = lo if ok else Fraction(r + 1, scale)
        else:
            mag = abs(float(self.e)) * abs(num.bit_length() - den.bit_length())
            with _ivprec(prec + int(mag) + 32):
                ln = iv.log(_iv_from_int(num)) - iv.log(_iv_from_int(den))
                val = iv.exp(iv.mpf(ap) / iv.mpf(q) * ln)
                lo, hi = _iv_to_fractions(val)
            if lo <= 0:
                raise _Undecided
        if p < 0:
            lo, hi = 1 / hi, 1 / lo
        return lo, hi


class _Log(HighPrecisionReal):
    __slots__ = ("n",)

    def __init__(self, n: int) -> None:
        super().__init__()
        self.n = n

    def _exact(self):
        return Fraction(0) if self.n == 1 else None

    def _fast(self):
        v = math.log(self.n)
        return v, abs(v) * _REL_LIBM

    def _enclose(self, prec):
        if self.n == 1:
            return Fraction(0), Fraction(0)
        with _ivprec(prec + 32):
            return _iv_to_fractions(iv.log(_iv_from_int(self.n)))


class _Neg(HighPrecisionReal):
    __slots__ = ("x",)

    def __init__(self, x) -> None:
        super().__init__()
        self.x = x

    def _exact(self):
        e = self.x.exact()
        return None if e is None else -e

    def _fast(self):
        f = self.x.fast()
        return None if f is None else (-f[0], f[1])

    def _enclose(self, prec):
        lo, hi = self.x.enclose(prec)
        return -hi, -lo


class _Add(HighPrecisionReal):
    __slots__ = ("x", "y")

    def __init__(self, x, y) -> None:
        super().__init__()
        self.x = x
        self.y = y

    def _exact(self):
        a = self.x.exact()
        if a is None:
            return None
        b = self.y.exact()
        return None if b is None else a + b

    def _fast(self):
        a, b = self.x.fast(), self.y.fast()
        if a is None or b is None:
            return None
        v = a[0] + b[0]
        return v, a[1] + b[1] + abs(v) * _ULP

    def _enclose(self, prec):
        a, b = self.x.enclose(prec), self.y.enclose(prec)
        return a[0] + b[0], a[1] + b[1]


def _imul(a, b):
    c = (a[0] * b[0], a[0] * b[1], a[1] * b[0], a[1] * b[1])
    return min(c), max(c)


class _Mul(HighPrecisionReal):
    __slots__ = ("x", "y")

    def __init__(self, x, y) -> None:
        super().__init__()
        self.x = x
        self.y = y

    def _exact(self):
        a = self.x.exact()
        if a is None:
            return None
        b = self.y.exact()
        return None if b is None else a * b

    def _fast(self):
        a, b = self.x.fast(), self.y.fast()
        if a is None or b is None:
            return None
        v = a[0] * b[0]
        return v, abs(a[0]) * b[1] + abs(b[0]) * a[1] + a[1] * b[1] + abs(v) * _ULP

    def _enclose(self, prec):
        return _imul(self.x.enclose(prec), self.y.enclose(prec))


class _Div(HighPrecisionReal):
    __slots__ = ("x", "y")

    def __init__(self, x, y) -> None:
        super().__init__()
        self.x = x
        self.y = y

    def _exact(self):
        a = self.x.exact()
        if a is None:
            return None
        b = self.y.exact()
        if b is None or b == 0:
            return None
        return a / b

    def _fast(self):
        a, b = self.x.fast(), self.y.fast()
        if a is None or b is None or abs(b[0]) <= 2 * b[1]:
            return None
        v = a[0] / b[0]
        ab = abs(b[0])
        err = (abs(a[0]) * b[1] + ab * a[1]) / (ab * (ab - b[1]))
        return v, err + abs(v) * _ULP

    def _enclose(self, prec):
        lo, hi = self.y.enclose(prec)
        if lo <= 0 <= hi:
            raise _Undecided
        return _imul(self.x.enclose(prec), (1 / hi, 1 / lo))


class _IntPow(HighPrecisionReal):
    __slots__ = ("x", "k")

    def __init__(self, x, k: int) -> None:
        super().__init__()
        self.x = x
        self.k = k

    def _exact(self):
        a = self.x.exact()
        return None if a is None else a**self.k

    def _fast(self):
        a = self.x.fast()
        if a is None:
            return None
        v = a[0] ** self.k
        if a[0] == 0:
            return v, a[1] ** self.k
        rel = a[1] / abs(a[0])
        return v, abs(v) * (math.expm1(self.k * math.log1p(rel)) + self.k * _ULP)

    def _enclose(self, prec):
        lo, hi = self.x.enclose(prec)
        k = self.k
        if lo >= 0 or k % 2 == 1:
            return lo**k, hi**k
        if hi <= 0:
            return hi**k, lo**k
        return Fraction(0), max(lo**k, hi**k)
