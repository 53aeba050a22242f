"""Command-line front end: build/export tables, Green's analyses, ranks, verification.

Exit codes: 0 success / all verified, 1 verification mismatch, 2 invalid
arguments, 3 budget exhausted (bounds emitted). The default search budget is
60 seconds and 1e8 nodes; BRANDT_RANKS_BUDGET overrides the seconds default.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from math import factorial
from pathlib import Path

from . import engine
from .affine import NSupport, a_plus_semigroup, a_plus_size, enumerate_a_plus
from .errors import InvalidParameterError
from .ranks import (
    RankReport,
    SearchBudget,
    a_plus_strata_caps,
    construct_witness,
    intermediate_rank_bruteforce,
    intermediate_rank_verify,
    kappa_upper_bound,
    large_rank_exact,
    lower_rank_exact,
    rank_formulas,
    small_rank,
    upper_rank_search,
)
from .verify import verify_all

EXIT_OK = 0
EXIT_MISMATCH = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

DEFAULT_BUDGET_SECONDS = 60.0
DEFAULT_NODE_LIMIT = 100_000_000
BUDGET_ENV_VAR = "BRANDT_RANKS_BUDGET"


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not an integer") from None
    if value < 1:
        raise argparse.ArgumentTypeError("value must be >= 1")
    return value


def _positive_float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"{text!r} is not a number") from None
    if value <= 0:
        raise argparse.ArgumentTypeError("value must be positive")
    return value


def _default_seconds() -> float:
    env = os.environ.get(BUDGET_ENV_VAR)
    if env:
        try:
            value = float(env)
            if value > 0:
                return value
        except ValueError:
            pass
    return DEFAULT_BUDGET_SECONDS


def _budget(args) -> SearchBudget:
    seconds = args.budget if args.budget is not None else _default_seconds()
    nodes = getattr(args, "node_limit", None) or DEFAULT_NODE_LIMIT
    return SearchBudget(seconds=seconds, node_limit=nodes)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="brandt-ranks",
        description="Exact computations on the additive semigroup of affine maps over B_n.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, budget=False, fmt=None):
        p.add_argument("--n", type=_positive_int, required=True, metavar="N")
        if budget:
            p.add_argument("--budget", type=_positive_float, default=None,
                           metavar="SECONDS")
            p.add_argument("--node-limit", type=_positive_int, default=None,
                           metavar="NODES")
        if fmt:
            p.add_argument("--format", choices=fmt, default=fmt[0])

    p = sub.add_parser("build", help="emit the Cayley table of the semigroup")
    common(p, fmt=("json", "csv"))
    p.add_argument("--out", type=Path, default=None, metavar="FILE")

    p = sub.add_parser("count", help="print element counts and the formula breakdown")
    common(p)

    p = sub.add_parser("greens", help="print R/L class counts and the (n!)n cross-check")
    common(p, fmt=("text", "json"))

    p = sub.add_parser("rank", help="compute one rank, or the formula report")
    common(p, budget=True, fmt=("text", "json"))
    p.add_argument("--which", choices=("r1", "r2", "r3", "r5", "formulas"), required=True)

    p = sub.add_parser("search-r4", help="branch-and-bound for the maximum independent set")
    common(p, budget=True, fmt=("text", "json"))
    p.add_argument("--strata-caps", action="store_true",
                   help="tighten the bound with per-support-stratum caps")

    p = sub.add_parser("prime", help="find a smallest proper prime subset")
    common(p, fmt=("text", "json"))

    p = sub.add_parser("verify", help="run the full verification battery")
    common(p, budget=True, fmt=("text", "json"))
    return parser


def _emit(text: str, out: Path | None) -> None:
    if out is None:
        print(text)
    else:
        out.write_text(text if text.endswith("\n") else text + "\n", encoding="utf-8")


def _cmd_build(args) -> int:
    sg = a_plus_semigroup(args.n)
    _emit(engine.export_table(sg, args.format), args.out)
    return EXIT_OK


def _cmd_count(args) -> int:
    n = args.n
    total = a_plus_size(n)
    if n == 1:
        print("3 (n=1: xi(0), xi(1,1), ns(1,1;[1]))")
        return EXIT_OK
    print(f"{total} = ({n}!+1)·{n * n} + {n ** 4} + 1")
    print(f"  constants: {n * n + 1} (zero-constant included)")
    print(f"  singleton-support maps: {n ** 4}")
    print(f"  n-support maps: {factorial(n) * n * n}")
    return EXIT_OK


def _cmd_greens(args) -> int:
    n = args.n
    sg = a_plus_semigroup(n)
    elems = enumerate_a_plus(n)
    r_classes = engine.greens_classes(sg, "R")
    l_classes = engine.greens_classes(sg, "L")
    nsup = sum(1 for c in r_classes if any(isinstance(elems[i], NSupport) for i in c))
    expected = factorial(n) * n
    payload = {
        "n": n,
        "r_classes": len(r_classes),
        "l_classes": len(l_classes),
        "nsupport_r_classes": nsup,
        "nsupport_r_classes_expected": expected,
        "match": nsup == expected,
    }
    if args.format == "json":
        print(json.dumps(payload, indent=2))
    else:
        print(f"R-classes: {payload['r_classes']}")
        print(f"L-classes: {payload['l_classes']}")
        print(f"n-support R-classes: {nsup} (expected (n!)n = {expected})")
    return EXIT_OK if payload["match"] else EXIT_MISMATCH


def _print_rank(report: RankReport, fmt: str, verbose: int = 0) -> None:
    if fmt == "json":
        print(json.dumps(report.to_json_dict(), indent=2))
        return
    for key, rv in report.ranks.items():
        if rv.exact:
            line = f"{key} = {rv.value} [{rv.provenance}]"
        else:
            line = f"{key} in [{rv.bounds[0]}, {rv.bounds[1]}] [{rv.provenance}]"
        if rv.detail:
            line += f" ({rv.detail})"
        print(line)
        if verbose and rv.witness_labels:
            print(f"  witness: {' '.join(rv.witness_labels)}")


def _cmd_rank(args) -> int:
    n = args.n
    report = RankReport(n=n)
    if args.which == "formulas":
        report = rank_formulas(n)
        _print_rank(report, args.format, args.verbose)
        return EXIT_OK
    budget = _budget(args)
    sg = a_plus_semigroup(n)
    if args.which == "r1":
        rv = small_rank(sg, budget)
    elif args.which == "r2":
        witness = None
        if n >= 2:
            witness = construct_witness(n, "S") | construct_witness(n, "T")
        rv = lower_rank_exact(sg, budget, witness=witness)
    elif args.which == "r3":
        rv = intermediate_rank_bruteforce(sg, budget) if n == 1 else intermediate_rank_verify(n, budget, sg=sg)
    else:
        rv = large_rank_exact(sg)
    report.ranks[args.which] = rv
    _print_rank(report, args.format, args.verbose)
    return EXIT_OK if rv.exact else EXIT_BUDGET


def _cmd_search_r4(args) -> int:
    n = args.n
    budget = _budget(args)
    sg = a_plus_semigroup(n)
    caps = a_plus_strata_caps(n, sg) if args.strata_caps else None
    seed = None
    if n == 2:
        seed = construct_witness(2, "P2")
    elif n == 3:
        seed = construct_witness(3, "I")
    rv = upper_rank_search(sg, budget, strata_bounds=caps, seed=seed)
    if not rv.exact and n >= 2:
        formula_lower = 14 if n == 2 else factorial(n) * n * n + n
        rv.bounds = (max(rv.bounds[0], formula_lower), min(rv.bounds[1], kappa_upper_bound(n)))
        rv.detail = (rv.detail + "; merged with construction/cap bounds").lstrip("; ")
    report = RankReport(n=n)
    report.ranks["r4"] = rv
    _print_rank(report, args.format, args.verbose)
    return EXIT_OK if rv.exact else EXIT_BUDGET


def _cmd_prime(args) -> int:
    n = args.n
    sg = a_plus_semigroup(n)
    rv = large_rank_exact(sg)
    if args.format == "json":
        print(json.dumps({"n": n, "r5": rv.to_json_dict()}, indent=2))
    else:
        if rv.exact:
            print(rv.detail)
            print(f"r5 = {rv.value}")
        else:
            print(f"r5 in [{rv.bounds[0]}, {rv.bounds[1]}] ({rv.detail})")
    return EXIT_OK if rv.exact else EXIT_BUDGET


def _cmd_verify(args) -> int:
    report = verify_all(args.n, _budget(args))
    if args.format == "json":
        print(json.dumps(report.to_json_dict(), indent=2))
    else:
        print(report.to_text())
    return EXIT_OK if report.ok else EXIT_MISMATCH


_HANDLERS = {
    "build": _cmd_build,
    "count": _cmd_count,
    "greens": _cmd_greens,
    "rank": _cmd_rank,
    "search-r4": _cmd_search_r4,
    "prime": _cmd_prime,
    "verify": _cmd_verify,
}


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0,) else 0
    try:
        return _HANDLERS[args.command](args)
    except InvalidParameterError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
