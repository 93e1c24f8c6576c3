"""The acceptance suite: each criterion as a function returning a result.

Reports are deterministic for a given seed; wall-clock times are kept on
the result objects and never written into the report itself.
"""

from __future__ import annotations

import json
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .arith import factor_range, divisors
from .bounds import (
    alpha_closed_form,
    alpha_delta,
    alpha_feasible,
    alpha_oracle,
    prop1_bound,
    quadratic_holds,
    xi,
)
from .sieve import count_unsolvable, sieve_window_check, unsolvable_bruteforce
from .split import NoSplit, lemma1_check, theorem1_split, verify_split
from .window import DivisorTable, ExponentWindow, count_window, gap_check, reflection_check
from .witness import build_witness

# first success of build_witness(2/5, 1/10, M) for M = 10^4 * 2^k, k = 0, 1, ...
WITNESS_M = 85_899_345_920_000
DEFAULT_BUDGET = 600.0


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: dict = field(default_factory=dict)
    limit_seconds: float | None = None
    seconds: float = 0.0
    skipped: bool = False

    @property
    def within_time(self) -> bool:
        return self.limit_seconds is None or self.seconds < self.limit_seconds

    def to_dict(self) -> dict:
        return {
            "criterion": self.number,
            "name": self.name,
            "status": "SKIPPED" if self.skipped else ("PASS" if self.passed else "FAIL"),
            "detail": self.detail,
        }

    def line(self) -> str:
        status = "SKIP" if self.skipped else ("PASS" if self.passed else "FAIL")
        inner = ", ".join(f"{k}={_flat(v)}" for k, v in self.detail.items())
        return f"[{status}] {self.number:>2} {self.name}: {inner}"


def _flat(v) -> str:
    if isinstance(v, (list, dict)):
        return json.dumps(v, sort_keys=True)
    return str(v)


# -- criteria -------------------------------------------------------------------


def check_lemma4(seed: int = 0) -> CriterionResult:
    cases = mismatches = 0
    first = []
    for p in (3, 5, 7, 11, 13):
        for v in range(5):
            if p ** (v + 1) > 10**6:
                continue
            for u in range(1, p):
                cases += 1
                a, b = count_unsolvable(p, v, u), unsolvable_bruteforce(p, v, u)
                if a != b:
                    mismatches += 1
                    first.append([p, v, u, a, b])
    return CriterionResult(1, "lemma4-exactness", mismatches == 0, {"cases": cases, "mismatches": mismatches, "first": first[:5]}, 30)


def check_lemma1(seed: int = 0) -> CriterionResult:
    rng = random.Random(seed)
    failures = []
    n = 10**4
    for _ in range(n):
        k = rng.randint(1, 6)
        d = [rng.randint(1, 10**6) for _ in range(k)]
        t = rng.randint(-3, 5)
        if not lemma1_check(d, t):
            failures.append([d, t])
    return CriterionResult(2, "lemma1-property", not failures, {"cases": n, "seed": seed, "failures": len(failures), "first": failures[:3]}, 10)


def check_alpha_oracle(seed: int = 0) -> CriterionResult:
    worst = 0.0
    cells = 0
    undetected = []
    for i in range(50):
        th = Fraction(2 * i + 1, 100)
        for j in range(50):
            et = th * th + (th - th * th) * Fraction(j, 50)
            cells += 1
            a = alpha_closed_form(th, et).value
            worst = max(worst, abs(a - alpha_oracle(th, et)))
            if a < 1 and alpha_feasible(float(th), float(et), a * (1 + 1e-3)):
                undetected.append([str(th), str(et)])
    ok = worst <= 1e-4 and not undetected
    return CriterionResult(
        3,
        "alpha-oracle-agreement",
        ok,
        {"cells": cells, "max_abs_diff": f"{worst:.3e}", "maximality_undetected": len(undetected), "first": undetected[:3]},
        60,
    )


def check_sandwich(seed: int = 0) -> CriterionResult:
    cells = 0
    bad = []
    cands: dict[str, int] = {}
    for i in range(20):
        th = Fraction(2 * i + 1, 40)
        for de in (Fraction(1, 20), Fraction(1, 10), Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            lower = th * th - (th * (1 - th)) ** 2 * de
            for j in range(20):
                et = lower + (th - lower) * Fraction(j, 20)
                cells += 1
                ad = alpha_delta(th, et, de)
                cands[ad.candidate.value] = cands.get(ad.candidate.value, 0) + 1
                x = xi(th, et).exact
                a = Fraction(ad.value)
                if not (x - de <= a <= x and quadratic_holds(th, et, ad.value, ad.epsilon_var, grid=1000)):
                    bad.append([str(th), str(et), str(de)])
    return CriterionResult(
        4, "alpha-delta-sandwich", not bad, {"cells": cells, "failures": len(bad), "candidates": dict(sorted(cands.items())), "first": bad[:3]}, 60
    )


def split_grid() -> list[tuple[Fraction, Fraction]]:
    """theta in {3/10, 1/2, 7/10}; eta at theta^2, the midpoint, and 9/10 of the way to theta."""
    out = []
    for th in (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)):
        sq = th * th
        out += [(th, sq), (th, (sq + th) / 2), (th, th - (th - sq) / 10)]
    return out


_SPLIT_KEYS = ("product", "coprime", "prefix", "minimal_s", "tau_b_check", "identity")


def check_split_pipeline(seed: int = 0, limit: int = 10**5) -> CriterionResult:
    grid = split_grid()
    regimes: dict[str, int] = {}
    failures = []
    guard = 0
    for n in factor_range(limit, 2):
        for th, et in grid:
            try:
                sp = theorem1_split(n, th, et)
            except NoSplit as exc:
                regimes[exc.regime] = regimes.get(exc.regime, 0) + 1
                continue
            regimes["split"] = regimes.get("split", 0) + 1
            v = verify_split(sp)
            guard += v["guard_violations"]
            if not all(v[k] for k in _SPLIT_KEYS):
                failures.append([n.value, str(th), str(et), [k for k in _SPLIT_KEYS if not v[k]]])
    return CriterionResult(
        5,
        "split-pipeline",
        not failures,
        {
            "max_n": limit,
            "grid": [[str(a), str(b)] for a, b in grid],
            "regimes": dict(sorted(regimes.items())),
            "failures": len(failures),
            "guard_observations": guard,
            "first": failures[:3],
        },
        300,
    )


def prop1_grid() -> list[tuple[Fraction, Fraction]]:
    """theta in {3/10, 1/2, 7/10}; epsilon = theta^2 times 1/10, 1/4, 1/2."""
    return [(th, th * th * k) for th in (Fraction(3, 10), Fraction(1, 2), Fraction(7, 10)) for k in (Fraction(1, 10), Fraction(1, 4), Fraction(1, 2))]


def check_prop1(seed: int = 0, limit: int = 10**6, sample: int = 300) -> CriterionResult:
    table = DivisorTable(limit)
    rng = random.Random(seed)
    probe = list(range(1, min(limit, 2000) + 1)) + sorted(rng.randint(1, limit) for _ in range(sample))
    rows = []
    ok = True
    cross = 0
    for th, ep in prop1_grid():
        et = th * th - ep
        counts = table.window_counts(th, et)
        cap = prop1_bound(th, ep)
        mx = int(counts.max())
        w = ExponentWindow.exponents(th, et)
        # the vectorised counts against per-n certified counting
        for n in probe:
            if count_window(n, w) != int(counts[n]):
                cross += 1
        good = mx <= cap
        ok = ok and good
        rows.append({"theta": str(th), "epsilon": str(ep), "max_count": mx, "argmax": int(counts.argmax()), "bound": str(cap), "ok": good})
    return CriterionResult(6, "prop1-dominance", ok and cross == 0, {"max_n": limit, "cross_check_mismatches": cross, "rows": rows}, 300)


def check_sieve(seed: int = 0, samples: int = 1000) -> CriterionResult:
    rng = random.Random(seed)
    bad = []
    for _ in range(samples):
        n = rng.randint(1, 10**6)
        a = rng.randint(1, 10)
        b = rng.randint(1, 10)
        while math.gcd(a, b) != 1:
            b = rng.randint(1, 10)
        i = rng.randint(1, 10)
        Q = rng.randint(1, 50)
        r = sieve_window_check(n, a, b, i, Q)
        if not r.ok:
            bad.append([n, a, b, i, Q])
    return CriterionResult(7, "sieve-consistency", not bad, {"samples": samples, "seed": seed, "failures": len(bad), "first": bad[:3]}, 120)


def check_witness(seed: int = 0) -> CriterionResult:
    rep = build_witness(Fraction(2, 5), Fraction(1, 10), WITNESS_M)
    ok = rep.success and rep.packed_count == 20 and all(v for v in rep.checks.values() if isinstance(v, bool))
    return CriterionResult(
        8,
        "witness-packing",
        ok,
        {"M": str(WITNESS_M), "s": rep.s, "r": rep.r, "m": str(rep.m), "packed_count": rep.packed_count, "binom_target": rep.binom_target, **rep.checks},
        120,
    )


def _reflection_windows(divs: list[int]):
    # windows with both ends on divisors, and windows straddling one divisor
    for d, nxt in zip(divs, divs[1:]):
        if nxt - d <= d:
            yield Fraction(d), Fraction(nxt - d)
    for d in divs:
        if d > 1:
            yield d - Fraction(1, 3), Fraction(2, 3)


def check_elementary(seed: int = 0, reflect_max: int = 10**4, gap_max: int = 10**5) -> CriterionResult:
    windows = 0
    reflect_bad = []
    for n in factor_range(reflect_max):
        for X, Y in _reflection_windows(divisors(n)):
            windows += 1
            if not reflection_check(n, X, Y):
                reflect_bad.append([n.value, str(X), str(Y)])
    gap_bad = [n.value for n in factor_range(gap_max) if not gap_check(n)]
    return CriterionResult(
        9,
        "elementary-facts",
        not reflect_bad and not gap_bad,
        {"reflection_max_n": reflect_max, "windows": windows, "reflection_failures": len(reflect_bad), "gap_max_n": gap_max, "gap_failures": len(gap_bad)},
        60,
    )


CRITERIA: tuple[Callable[..., CriterionResult], ...] = (
    check_lemma4,
    check_lemma1,
    check_alpha_oracle,
    check_sandwich,
    check_split_pipeline,
    check_prop1,
    check_sieve,
    check_witness,
    check_elementary,
)


@dataclass
class SuiteReport:
    seed: int
    results: list[CriterionResult]

    @property
    def passed(self) -> bool:
        return all(r.passed and not r.skipped for r in self.results)

    def to_text(self) -> str:
        lines = [f"acceptance suite (seed {self.seed})"]
        lines += [r.line() for r in self.results]
        lines.append("ALL PASS" if self.passed else "FAILURES PRESENT")
        return "\n".join(lines) + "\n"

    def to_json(self) -> str:
        return json.dumps({"seed": self.seed, "passed": self.passed, "criteria": [r.to_dict() for r in self.results]}, indent=2, sort_keys=True) + "\n"


def run_suite(seed: int = 0, budget: float = DEFAULT_BUDGET, only: set[int] | None = None, log=None) -> SuiteReport:
    """Run the criteria in order; once ``budget`` seconds are spent the rest are skipped.

    Per-criterion timings go to ``log`` when given, never into the report.
    """
    start = time.perf_counter()
    results = []
    for num, fn in enumerate(CRITERIA, 1):
        if only is not None and num not in only:
            continue
        t0 = time.perf_counter()
        if t0 - start > budget:
            results.append(CriterionResult(num, fn.__name__.removeprefix("check_"), False, {"reason": "time budget exhausted"}, skipped=True))
            continue
        res = fn(seed=seed)
        res.seconds = time.perf_counter() - t0
        if log is not None:
            print(f"criterion {res.number}: {res.seconds:.1f} s", file=log, flush=True)
        results.append(res)
    return SuiteReport(seed, results)
