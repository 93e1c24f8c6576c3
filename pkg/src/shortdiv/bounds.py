"""Piecewise exponents for short-interval divisor bounds.

Case selection is done in exact rational arithmetic on the inputs (floats
are read as decimals), so boundaries such as ``2*eta == theta`` are
resolved exactly as the inequalities are written.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from enum import Enum
from fractions import Fraction
from functools import lru_cache

import numpy as np
from mpmath import mp, mpf, sqrt
from mpmath.libmp import round_floor, to_float

from .arith import as_factored, profile
from .hpreal import to_fraction


class Case(str, Enum):
    ETA_LE_THETA_SQ = "ETA_LE_THETA_SQ"
    SMALL_THETA_FAR = "SMALL_THETA_FAR"
    SMALL_THETA_NEAR = "SMALL_THETA_NEAR"
    LARGE_THETA_FAR = "LARGE_THETA_FAR"
    LARGE_THETA_NEAR = "LARGE_THETA_NEAR"


class Candidate(str, Enum):
    DELTA_OVER = "DELTA_OVER"
    ALPHA0 = "ALPHA0"
    ALPHA1 = "ALPHA1"


@dataclass(frozen=True)
class PiecewiseExponent:
    exact: Fraction
    case_label: Case

    @property
    def value(self) -> float:
        return float(self.exact)


@dataclass(frozen=True)
class DeltaExponent:
    value: float
    candidate: Candidate
    epsilon_var: Fraction


def _check_open(theta: Fraction, eta: Fraction) -> None:
    if not 0 < eta < theta < 1:
        raise ValueError(f"need 0 < eta < theta < 1, got theta={theta}, eta={eta}")


def _tail(theta: Fraction, eta: Fraction) -> PiecewiseExponent:
    # the four cases with eta >= theta^2
    if theta <= Fraction(1, 2):
        if 2 * eta <= theta:
            return PiecewiseExponent(theta * theta / eta, Case.SMALL_THETA_FAR)
        return PiecewiseExponent(4 * (theta - eta), Case.SMALL_THETA_NEAR)
    if 2 * eta <= 3 * theta - 1:
        u = (1 - theta) ** 2
        return PiecewiseExponent(u / (u + eta - theta * theta), Case.LARGE_THETA_FAR)
    return PiecewiseExponent(4 * (theta - eta), Case.LARGE_THETA_NEAR)


def xi(theta, eta) -> PiecewiseExponent:
    """Saving exponent of the general short-interval bound."""
    return _xi(to_fraction(theta), to_fraction(eta))


@lru_cache(maxsize=4096)
def _xi(theta: Fraction, eta: Fraction) -> PiecewiseExponent:
    _check_open(theta, eta)
    if eta <= theta * theta:
        return PiecewiseExponent(Fraction(1), Case.ETA_LE_THETA_SQ)
    return _tail(theta, eta)


def alpha_closed_form(theta, eta) -> PiecewiseExponent:
    """Largest alpha keeping ((theta-t)/alpha)^2 - (eta-t)/alpha >= 0 on [0, 1-alpha]."""
    theta, eta = to_fraction(theta), to_fraction(eta)
    _check_open(theta, eta)
    if eta < theta * theta:
        raise ValueError("alpha_closed_form needs theta^2 <= eta")
    return _tail(theta, eta)


def _min_quadratic(theta: float, eta: float, alpha: float, grid: int) -> float:
    # min over t in [0, 1-alpha] of (theta-t)^2 - alpha*(eta-t), grid plus vertex
    ts = np.linspace(0.0, 1.0 - alpha, grid + 1)
    vals = (theta - ts) ** 2 - alpha * (eta - ts)
    m = float(vals.min())
    tv = theta - alpha / 2
    if 0.0 <= tv <= 1.0 - alpha:
        m = min(m, (theta - tv) ** 2 - alpha * (eta - tv))
    return m


def alpha_feasible(theta: float, eta: float, alpha: float, grid: int = 1000, shift: float = 0.0) -> bool:
    """Float test of F(t) - shift >= 0 on the t-grid of [0, 1 - alpha] plus the vertex."""
    if not 0 < alpha <= 1:
        return False
    # F(t) >= shift  <=>  (theta-t)^2 - alpha(eta-t) - shift*alpha^2 >= 0
    return _min_quadratic(theta, eta, alpha, grid) - shift * alpha * alpha >= 0.0


def quadratic_holds(theta, eta, alpha, shift=0, grid: int = 1000) -> bool:
    """Exact version of :func:`alpha_feasible`.

    Float evaluation screens the grid; points within a relative 1e-9 of
    zero, and the vertex of the quadratic, are re-evaluated in rationals
    with ``alpha`` taken as the exact value of its float.
    """
    th, et, sh = to_fraction(theta), to_fraction(eta), to_fraction(shift)
    a = Fraction(alpha) if isinstance(alpha, float) else to_fraction(alpha)
    if not 0 < a <= 1:
        return False

    def g(t: Fraction) -> Fraction:
        return (th - t) ** 2 - a * (et - t) - sh * a * a

    thf, etf, af, shf = float(th), float(et), float(a), float(sh)
    ts = np.linspace(0.0, 1.0 - af, grid + 1)
    vals = (thf - ts) ** 2 - af * (etf - ts) - shf * af * af
    scale = 1e-9 * (1.0 + thf * thf + af * (abs(etf) + 1.0) + shf * af * af)
    width = 1 - a
    for j in np.flatnonzero(vals <= scale).tolist():
        if g(width * j / grid) < 0:
            return False
    tv = th - a / 2
    if 0 <= tv <= width and g(tv) < 0:
        return False
    return True


def alpha_oracle(theta, eta, grid: int = 1000, tol: float = 1e-8) -> float:
    """Bisection for the largest feasible alpha, independent of the case table."""
    th, et = float(to_fraction(theta)), float(to_fraction(eta))
    if grid < 1000:
        raise ValueError("alpha_oracle needs grid >= 1000")
    if alpha_feasible(th, et, 1.0, grid):
        return 1.0
    lo, hi = 0.0, 1.0
    while hi - lo > tol:
        mid = (lo + hi) / 2
        if alpha_feasible(th, et, mid, grid):
            lo = mid
        else:
            hi = mid
    return lo


def alpha_delta(theta, eta, delta) -> DeltaExponent:
    """Exponent keeping F(t) >= (theta(1-theta))^2 * delta on [0, 1-alpha].

    The returned float is rounded toward zero, which keeps the property
    (it holds for every smaller alpha).
    """
    return _alpha_delta(to_fraction(theta), to_fraction(eta), to_fraction(delta))


@lru_cache(maxsize=4096)
def _alpha_delta(theta: Fraction, eta: Fraction, delta: Fraction) -> DeltaExponent:
    eps = (theta * (1 - theta)) ** 2 * delta
    if not (0 < delta <= 1 and 0 < theta * theta - eps <= eta < theta < 1):
        raise ValueError(
            f"need delta <= 1 and 0 < theta^2 - (theta(1-theta))^2 delta <= eta < theta < 1; "
            f"got theta={theta}, eta={eta}, delta={delta}"
        )
    big_delta = 4 * (theta - eta)
    with mp.workprec(128):
        e = mpf(eps.numerator) / eps.denominator
        th = mpf(theta.numerator) / theta.denominator
        et = mpf(eta.numerator) / eta.denominator
        floor_val = mpf(big_delta.numerator) / big_delta.denominator / (1 + 4 * e)
        value, cand = floor_val, Candidate.DELTA_OVER
        if 2 * eta <= theta - 4 * theta * eps:
            a0 = (-et + sqrt(et * et + 4 * e * th * th)) / (2 * e)
            if a0 >= floor_val:
                value, cand = a0, Candidate.ALPHA0
        elif 2 * eta <= 3 * theta - 1 - 4 * (1 - theta) * eps:
            c = 1 - 2 * th + et
            a1 = (-c + sqrt(c * c + 4 * e * (1 - th) ** 2)) / (2 * e)
            if a1 >= floor_val:
                value, cand = a1, Candidate.ALPHA1
        out = to_float(value._mpf_, rnd=round_floor)
    return DeltaExponent(out, cand, eps)


def prop1_bound(theta, epsilon) -> Fraction:
    """Explicit cap on D_n(n^theta, n^(theta^2 - epsilon)) from the proof constants."""
    theta, epsilon = to_fraction(theta), to_fraction(epsilon)
    if not (0 < theta < 1 and 0 < epsilon < theta * theta):
        raise ValueError("prop1_bound needs 0 < theta < 1 and 0 < epsilon < theta^2")
    w = theta * (1 - theta)
    return max(4 / w, 3 * w / epsilon) + 1


def theorem1_rhs(n, theta, eta, constant: float = 1.0) -> float | None:
    """tau^(1-xi) V log(tau) / (theta(1-theta)) scaled by ``constant``.

    Returns None when tau(n) < 3, where the bound is trivial.
    """
    prof = profile(as_factored(n))
    if prof.tau < 3:
        return None
    th = to_fraction(theta)
    x = xi(th, eta).value
    w = float(th * (1 - th))
    return constant * prof.tau ** (1 - x) * prof.v_max * math.log(prof.tau) / w


def xi_grid_csv(rows) -> str:
    """CSV ``theta,eta,xi,case`` from ``(theta, eta, PiecewiseExponent)`` rows."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "eta", "xi", "case"])
    for th, et, pe in rows:
        w.writerow([str(th), str(et), repr(pe.value), pe.case_label.value])
    return buf.getvalue()


def alpha_delta_grid_csv(rows) -> str:
    """CSV ``theta,eta,delta,alpha_delta,candidate``."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(["theta", "eta", "delta", "alpha_delta", "candidate"])
    for th, et, de, ad in rows:
        w.writerow([str(th), str(et), str(de), repr(ad.value), ad.candidate.value])
    return buf.getvalue()
