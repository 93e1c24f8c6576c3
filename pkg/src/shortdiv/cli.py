"""Command-line front end: one subcommand per experiment family.

Exit status: 0 when every check passes, 1 when a check fails or a
resource limit is hit, 2 on invalid arguments.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import hpreal
from .arith import ResourceLimitError, as_factored, profile
from .bounds import (
    alpha_closed_form,
    alpha_delta,
    alpha_delta_grid_csv,
    alpha_oracle,
    prop1_bound,
    xi,
    xi_grid_csv,
)
from .hpreal import PrecisionExhausted, to_fraction
from .sieve import count_unsolvable, sieve_bound_scan, sieve_window_check, unsolvable_bruteforce
from .split import NoSplit, lemma1_check, lemma2_order, theorem1_split, verify_split
from .verify import DEFAULT_BUDGET, run_suite
from .window import DivisorTable, ExponentWindow, conjecture_scan, count_window
from .witness import (
    Prop4Witness,
    WitnessError,
    build_witness,
    build_witness_large_theta,
    prop4_witness,
    stirling_diagnostic,
)


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        raise _UsageError(f"{self.prog}: error: {message}")


class _UsageError(Exception):
    pass


def _real(text: str) -> Fraction:
    try:
        return to_fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a real number: {text!r}") from exc


def _real_text(text: str) -> str:
    # validated, but kept verbatim so tables echo the command line
    _real(text)
    return text.strip()


def _posint(text: str) -> int:
    try:
        v = int(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from exc
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be positive: {text!r}")
    return v


def _flat_csv(d: dict) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    keys = [k for k, v in d.items() if not isinstance(v, (list, dict))]
    w.writerow(keys)
    w.writerow([d[k] for k in keys])
    return buf.getvalue()


def _text(d: dict) -> str:
    return "".join(f"{k}: {json.dumps(v, sort_keys=True) if isinstance(v, (list, dict)) else v}\n" for k, v in d.items())


def _render(args, d: dict, text: str | None = None, table: str | None = None) -> str:
    if args.format == "json":
        return json.dumps(d, indent=2, sort_keys=True) + "\n"
    if args.format == "csv":
        return table if table is not None else _flat_csv(d)
    return text if text is not None else _text(d)


# -- handlers ---------------------------------------------------------------------


def cmd_count(args) -> tuple[str, bool]:
    n = as_factored(args.n)
    if args.theta is not None:
        if args.eta is None:
            raise ValueError("--theta needs --eta")
        w = ExponentWindow.exponents(args.theta, args.eta)
        params = {"theta": str(args.theta), "eta": str(args.eta)}
    elif args.X is not None and args.Y is not None:
        w = ExponentWindow.absolute(args.X, args.Y)
        params = {"X": str(args.X), "Y": str(args.Y)}
    else:
        raise ValueError("give either --theta/--eta or --X/--Y")
    c = count_window(n, w)
    d = {"n": str(n.value), **params, "count": c}
    return _render(args, d, text=f"D_n = {c} for n = {n.value} ({', '.join(f'{k}={v}' for k, v in params.items())})\n"), True


def cmd_scan(args) -> tuple[str, bool]:
    res = conjecture_scan(range(args.min_n, args.max_n + 1), args.theta, args.epsilon, jobs=args.jobs)
    if args.format == "json":
        return json.dumps(res.to_dict(), indent=2, sort_keys=True) + "\n", True
    if args.format == "csv":
        return res.to_csv(), True
    lines = [f"running maxima of D_n(n^{res.theta}, n^({res.theta}-{res.epsilon})) for {args.min_n} <= n <= {args.max_n}"]
    lines += [f"{n:>12} {c}" for n, c in res.rows]
    lines += [f"error at n={n}: {msg}" for n, msg in res.errors]
    return "\n".join(lines) + "\n", True


def _grid(k: int) -> list[Fraction]:
    return [Fraction(2 * i + 1, 2 * k) for i in range(k)]


def cmd_xi(args) -> tuple[str, bool]:
    if args.grid:
        rows = [(th, th * e, xi(th, th * e)) for th in _grid(args.grid) for e in _grid(args.grid)]
        table = xi_grid_csv(rows)
        d = {"rows": [{"theta": str(a), "eta": str(b), "xi": str(p.exact), "case": p.case_label.value} for a, b, p in rows]}
        return _render(args, d, text=table, table=table), True
    pe = xi(_need(args.theta, "theta"), _need(args.eta, "eta"))
    d = {"theta": str(args.theta), "eta": str(args.eta), "value": str(pe.exact), "float": repr(pe.value), "case": pe.case_label.value}
    return _render(args, d, text=f"value {pe.exact}\ncase {pe.case_label.value}\n"), True


def cmd_alpha(args) -> tuple[str, bool]:
    th, et = _need(args.theta, "theta"), _need(args.eta, "eta")
    pe = alpha_closed_form(th, et)
    o = alpha_oracle(th, et, grid=args.grid_points)
    diff = abs(pe.value - o)
    ok = diff <= 1e-4
    d = {"theta": str(th), "eta": str(et), "closed_form": str(pe.exact), "case": pe.case_label.value, "oracle": repr(o), "abs_diff": f"{diff:.3e}", "agree": ok}
    return _render(args, d), ok


def cmd_alpha_delta(args) -> tuple[str, bool]:
    de = _need(args.delta, "delta")
    if args.grid:
        rows = []
        for th in _grid(args.grid):
            lower = th * th - (th * (1 - th)) ** 2 * de
            for j in range(args.grid):
                et = lower + (th - lower) * Fraction(j, args.grid)
                if et > 0:
                    rows.append((th, et, de, alpha_delta(th, et, de)))
        table = alpha_delta_grid_csv(rows)
        d = {"rows": [{"theta": str(a), "eta": str(b), "delta": str(c), "alpha_delta": repr(x.value), "candidate": x.candidate.value} for a, b, c, x in rows]}
        return _render(args, d, text=table, table=table), True
    th, et = _need(args.theta, "theta"), _need(args.eta, "eta")
    ad = alpha_delta(th, et, de)
    d = {
        "theta": str(th),
        "eta": str(et),
        "delta": str(de),
        "alpha_delta": repr(ad.value),
        "candidate": ad.candidate.value,
        "epsilon_var": str(ad.epsilon_var),
        "xi": str(xi(th, et).exact),
    }
    return _render(args, d), True


def cmd_prop1(args) -> tuple[str, bool]:
    th, ep = _need(args.theta, "theta"), _need(args.epsilon, "epsilon")
    cap = prop1_bound(th, ep)
    d = {
        "theta": str(th),
        "epsilon": str(ep),
        "bound": str(cap),
        "bound_float": repr(float(cap)),
        # the two case bounds joined into one cap; not a stated constant
        "cap_origin": "proof-derived: max(4/(theta(1-theta)), 3 theta(1-theta)/epsilon) + 1",
    }
    ok = True
    if args.max_n:
        counts = DivisorTable(args.max_n).window_counts(th, th * th - ep)
        mx = int(counts.max())
        ok = mx <= cap
        d.update({"max_n": args.max_n, "max_count": mx, "argmax": int(counts.argmax()), "dominated": ok})
    return _render(args, d), ok


def cmd_split(args) -> tuple[str, bool]:
    n = as_factored(args.n)
    try:
        sp = theorem1_split(n, args.theta, args.eta)
    except NoSplit as exc:
        d = {"n": str(n.value), "theta": str(args.theta), "eta": str(args.eta), "regime": exc.regime, "detail": str(exc)}
        return _render(args, d), True
    checks = verify_split(sp)
    full = sp.to_dict()
    full.update(checks)
    ok = all(checks[k] for k in ("product", "coprime", "prefix", "minimal_s", "tau_b_check", "identity"))
    text = (
        f"n = {n} (tau = {profile(n).tau})\n"
        f"a = {sp.a}, b = {sp.b}, s = {sp.s}, permutation = {list(sp.permutation)}\n"
        f"delta = {sp.delta!r}, xi = {sp.xi}, alpha_used = {sp.alpha_used!r} ({sp.candidate})\n"
        f"tau(b) = {checks['tau_b']} <= {checks['tau_b_bound']}: {checks['tau_b_check']}\n"
        f"identity {checks['lhs']} = {checks['rhs']}: {checks['identity']}\n"
        f"product {checks['product']}, coprime {checks['coprime']}, prefix {checks['prefix']}, minimal s {checks['minimal_s']}\n"
    )
    return _render(args, full, text=text), ok


def cmd_lemma1(args) -> tuple[str, bool]:
    ok = lemma1_check(args.d, args.t)
    d = {"d": [str(x) for x in args.d], "t": args.t, "holds": ok}
    return _render(args, d, text=f"{'holds' if ok else 'FAILS'}\n"), ok


def cmd_lemma2(args) -> tuple[str, bool]:
    pairs = []
    for item in args.pairs:
        try:
            x, y = item.split(",")
        except ValueError as exc:
            raise ValueError(f"pair {item!r} is not of the form x,y") from exc
        pairs.append((to_fraction(x), to_fraction(y)))
    order = lemma2_order(pairs)
    d = {"permutation": order}
    return _render(args, d, text=" ".join(map(str, order)) + "\n"), True


def cmd_lemma4(args) -> tuple[str, bool]:
    rec = count_unsolvable(args.p, args.v, args.u)
    brute = unsolvable_bruteforce(args.p, args.v, args.u)
    ok = rec == brute
    d = {"p": args.p, "v": args.v, "u": args.u, "recurrence": rec, "brute_force": brute, "match": ok}
    text = f"recurrence {rec}, brute force {brute}, {'MATCH' if ok else 'MISMATCH'}\n"
    return _render(args, d, text=text), ok


def cmd_sieve_bound(args) -> tuple[str, bool]:
    rep = sieve_window_check(args.n, args.a, args.b, args.i, args.Q)
    d = rep.to_dict()
    if args.scan:
        d["scan"] = [{"Q": q, "H": str(h), "bound": str(b)} for q, h, b in sieve_bound_scan(args.n, args.a, args.b, args.i, args.Q)]
    return _render(args, d), rep.ok


def cmd_witness(args) -> tuple[str, bool]:
    th, ep = _need(args.theta, "theta"), _need(args.epsilon, "epsilon")
    mode = args.mode
    if mode == "auto":
        if th > Fraction(1, 2):
            mode = "mirror"
        elif ep <= th / 2:
            mode = "packing"
        else:
            mode = "single"
    build = {
        "packing": lambda M: build_witness(th, ep, M),
        "mirror": lambda M: build_witness_large_theta(th, ep, M),
        "single": lambda M: prop4_witness(th, ep, M),
    }[mode]
    M = args.M
    rep = build(M)
    steps = 0
    while args.search and not isinstance(rep, Prop4Witness) and not rep.success and steps < 64:
        M *= 2
        steps += 1
        rep = build(M)
    if isinstance(rep, Prop4Witness):
        ok = rep.ok
        d = rep.to_dict()
        text = rep.transcript() + "\n"
    else:
        ok = rep.success
        d = rep.to_dict()
        text = rep.transcript() + "\n"
        if args.stirling:
            exact, closed = stirling_diagnostic(rep.s, rep.r, rep.theta if not rep.mirrored else 1 - rep.theta, ep)
            d["stirling_exact"] = str(exact)
            d["stirling_closed_form"] = closed
            text += f"binom(s, r) = {exact}; sqrt(eps theta^3) (theta^-theta (1-theta)^-(1-theta))^(1/eps) = {closed} (informational)\n"
    return _render(args, d, text=text), ok


def cmd_verify_all(args) -> tuple[str, bool]:
    only = None
    if args.only:
        only = {int(x) for x in args.only.split(",")}
    rep = run_suite(seed=args.seed, budget=args.budget, only=only, log=sys.stderr)
    if args.format == "json":
        return rep.to_json(), rep.passed
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["criterion", "name", "status"])
        for r in rep.results:
            w.writerow([r.number, r.name, r.to_dict()["status"]])
        return buf.getvalue(), rep.passed
    return rep.to_text(), rep.passed


def _need(v, name: str):
    if v is None:
        raise ValueError(f"--{name} is required")
    return v


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")
    common.add_argument("--output", help="write the result here instead of stdout")
    common.add_argument("--precision", type=int, default=None, help="starting precision in bits for certified comparisons")
    common.add_argument("--jobs", type=_posint, default=1, help="worker processes for scans")
    common.add_argument("--seed", type=int, default=0, help="seed for sampled suites")

    p = _Parser(prog="shortdiv", description="Divisors of an integer in short intervals: exact experiments.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, handler, help_text):
        sp = sub.add_parser(name, parents=[common], help=help_text, description=help_text)
        sp.set_defaults(handler=handler, usage=sp.format_usage())
        return sp

    s = add("count", cmd_count, "D_n(X, Y) for one n; CSV columns n,theta,eta,count or n,X,Y,count")
    s.add_argument("--n", type=_posint, required=True)
    s.add_argument("--theta", type=_real)
    s.add_argument("--eta", type=_real)
    s.add_argument("--X", type=_real)
    s.add_argument("--Y", type=_real)

    s = add("scan", cmd_scan, "running maxima of D_n(n^theta, n^(theta-epsilon)); CSV columns n,count,theta,epsilon")
    s.add_argument("--min-n", type=_posint, default=1)
    s.add_argument("--max-n", type=_posint, required=True)
    s.add_argument("--theta", type=_real_text, required=True)
    s.add_argument("--epsilon", type=_real_text, required=True)

    s = add("xi", cmd_xi, "saving exponent xi(theta, eta) and its case; with --grid K, CSV columns theta,eta,xi,case")
    s.add_argument("--theta", type=_real)
    s.add_argument("--eta", type=_real)
    s.add_argument("--grid", type=_posint)

    s = add("alpha", cmd_alpha, "closed-form alpha(theta, eta) against the bisection oracle")
    s.add_argument("--theta", type=_real)
    s.add_argument("--eta", type=_real)
    s.add_argument("--grid-points", type=_posint, default=1000)

    s = add("alpha-delta", cmd_alpha_delta, "alpha(theta, eta, delta); with --grid K, CSV columns theta,eta,delta,alpha_delta,candidate")
    s.add_argument("--theta", type=_real)
    s.add_argument("--eta", type=_real)
    s.add_argument("--delta", type=_real)
    s.add_argument("--grid", type=_posint)

    s = add("prop1", cmd_prop1, "explicit cap on D_n(n^theta, n^(theta^2 - epsilon)); --max-n checks it over n <= N")
    s.add_argument("--theta", type=_real)
    s.add_argument("--epsilon", type=_real)
    s.add_argument("--max-n", type=_posint)

    s = add("split", cmd_split, "coprime split n = a*b with all invariants checked")
    s.add_argument("--n", type=_posint, required=True)
    s.add_argument("--theta", type=_real, required=True)
    s.add_argument("--eta", type=_real, required=True)

    s = add("lemma1", cmd_lemma1, "lcm/gcd inequality for a list of positive integers")
    s.add_argument("--d", type=_posint, nargs="+", required=True)
    s.add_argument("--t", type=int, required=True)

    s = add("lemma2", cmd_lemma2, "prefix-dominating permutation of pairs given as x,y")
    s.add_argument("--pairs", nargs="+", required=True)

    s = add("lemma4", cmd_lemma4, "excluded-class count: closed form against brute force")
    s.add_argument("--p", type=int, required=True)
    s.add_argument("--v", type=int, required=True)
    s.add_argument("--u", type=int, required=True)

    s = add("sieve-bound", cmd_sieve_bound, "divisors above sqrt(an/b) against the elementary and large-sieve caps")
    s.add_argument("--n", type=_posint, required=True)
    s.add_argument("--a", type=_posint, default=1)
    s.add_argument("--b", type=_posint, default=1)
    s.add_argument("--i", type=_posint, required=True)
    s.add_argument("--Q", type=_posint, required=True)
    s.add_argument("--scan", action="store_true", help="also list H and the bound for every Q' <= Q")

    s = add("witness", cmd_witness, "integers with many divisors in one short window")
    s.add_argument("--theta", type=_real)
    s.add_argument("--epsilon", type=_real)
    s.add_argument("--M", type=_posint, required=True, help="prime threshold (or the divisor m for --mode single)")
    s.add_argument("--mode", choices=("auto", "packing", "mirror", "single"), default="auto")
    s.add_argument("--search", action="store_true", help="double M until the construction succeeds")
    s.add_argument("--stirling", action="store_true", help="add the binomial against its closed-form estimate")

    s = add("verify-all", cmd_verify_all, "run the acceptance suite; timings go to stderr")
    s.add_argument("--budget", type=float, default=DEFAULT_BUDGET, help="seconds before remaining criteria are skipped")
    s.add_argument("--only", help="comma-separated criterion numbers")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help
        return int(exc.code or 0)
    if args.precision is not None:
        if not 53 <= args.precision <= hpreal.MAX_PREC:
            sys.stderr.write(args.usage)
            print(f"shortdiv: error: --precision must lie in [53, {hpreal.MAX_PREC}]", file=sys.stderr)
            return 2
        hpreal.DEFAULT_PREC = args.precision
    try:
        out, ok = args.handler(args)
    except (ResourceLimitError, PrecisionExhausted, WitnessError) as exc:
        print(f"shortdiv {args.command}: {exc}", file=sys.stderr)
        return 1
    except (ValueError, TypeError, ZeroDivisionError) as exc:
        sys.stderr.write(args.usage)
        print(f"shortdiv {args.command}: error: {exc}", file=sys.stderr)
        return 2
    if args.output:
        with open(args.output, "w", encoding="utf-8", newline="") as fh:
            fh.write(out)
    else:
        sys.stdout.write(out)
    return 0 if ok else 1


if __name__ == "__main__":
    sys.exit(main())
