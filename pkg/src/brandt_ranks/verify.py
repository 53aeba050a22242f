"""End-to-end verification battery for the additive affine-map semigroup.

``verify_all(n, budget)`` runs, in order: element counts, closure of the
enumerated set, the brute-force reconstruction oracle (n <= 2), the Green's
relation cross-checks, the support bound under sums, the witness
constructions with their independence/generation/primality assertions, the
exact rank computations against the closed forms, and the upper-rank
bounds (with exact search when the budget permits). Each item reports
pass/fail and its timing; any mismatch flips the report status.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from math import factorial

from . import engine
from .affine import (
    Const,
    ConstZero,
    NSupport,
    RawMap,
    Singleton,
    a_plus_semigroup,
    a_plus_size,
    add_maps,
    affine_closure_oracle,
    apply_map,
    enumerate_a_plus,
    map_table,
    support,
    support_size,
)
from .brandt import bn_index, check_n
from .engine import FiniteSemigroup, IndexSet
from .errors import WitnessVerificationError
from .ranks import (
    PROV_BOUNDS,
    PROV_SEARCH,
    RankReport,
    RankValue,
    SearchBudget,
    _small_rank_bruteforce,
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


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str = ""
    elapsed_ms: float = 0.0


@dataclass
class VerificationReport:
    n: int
    checks: list[CheckResult] = field(default_factory=list)
    ranks: RankReport | None = None

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def to_json_dict(self) -> dict:
        return {
            "n": self.n,
            "ok": self.ok,
            "checks": [
                {
                    "name": c.name,
                    "passed": c.passed,
                    "detail": c.detail,
                    "elapsed_ms": round(c.elapsed_ms, 3),
                }
                for c in self.checks
            ],
            "ranks": self.ranks.to_json_dict() if self.ranks else None,
        }

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            mark = "PASS" if c.passed else "FAIL"
            detail = f" ({c.detail})" if c.detail else ""
            lines.append(f"[{mark}] {c.name}{detail} [{c.elapsed_ms:.0f} ms]")
        lines.append(f"overall: {'ok' if self.ok else 'MISMATCH'}")
        return "\n".join(lines)


class _Runner:
    def __init__(self, report: VerificationReport):
        self.report = report

    def run(self, name: str, fn) -> bool:
        start = time.monotonic()
        try:
            detail = fn()
            passed, detail = True, (detail or "")
        except Exception as exc:  # a failed check is a result, not a crash
            passed, detail = False, f"{type(exc).__name__}: {exc}"
        self.report.checks.append(
            CheckResult(name, passed, detail, (time.monotonic() - start) * 1000.0)
        )
        return passed


def _require(cond: bool, msg: str) -> None:
    if not cond:
        raise WitnessVerificationError(msg)


def _greens_r_characterization(n: int, sg: FiniteSemigroup) -> str:
    """Generic R-partition vs equal supports plus equal first projections."""
    elems = enumerate_a_plus(n)
    nonzero = [i for i, e in enumerate(elems) if not isinstance(e, ConstZero)]
    generic = {
        frozenset(c)
        for cls in engine.greens_classes(sg, "R")
        if (c := [i for i in cls if not isinstance(elems[i], ConstZero)])
    }
    sigs: dict[tuple, list[int]] = {}
    for i in nonzero:
        e = elems[i]
        supp = sorted(support(n, e), key=lambda x: bn_index(n, x))
        pi1 = tuple(apply_map(n, e, x)[0] for x in supp)
        sigs.setdefault((tuple(supp), pi1), []).append(i)
    characterized = {frozenset(v) for v in sigs.values()}
    _require(generic == characterized, "R-classes disagree with the support/projection form")
    return f"{len(characterized)} nonzero R-classes match"


def _greens_l_constants(n: int, sg: FiniteSemigroup) -> str:
    """Generic L-partition on nonzero constants vs equal second projections."""
    elems = enumerate_a_plus(n)
    consts = [i for i, e in enumerate(elems) if isinstance(e, Const)]
    generic = {
        frozenset(c)
        for cls in engine.greens_classes(sg, "L")
        if (c := [i for i in cls if isinstance(elems[i], Const)])
    }
    sigs: dict[int, list[int]] = {}
    for i in consts:
        sigs.setdefault(elems[i].c[1], []).append(i)
    _require(
        generic == {frozenset(v) for v in sigs.values()},
        "L-classes on nonzero constants disagree with the second projection",
    )
    return f"{len(sigs)} constant L-classes match"


def _greens_nsupport_count(n: int, sg: FiniteSemigroup) -> str:
    elems = enumerate_a_plus(n)
    count = sum(
        1
        for cls in engine.greens_classes(sg, "R")
        if any(isinstance(elems[i], NSupport) for i in cls)
    )
    expected = factorial(n) * n
    _require(count == expected, f"n-support R-class count {count} != {expected}")
    return f"(n!)n = {expected} n-support R-classes"


def _support_sum_bound(n: int) -> str:
    """|supp(f+g)| <= |supp(f)| and <= |supp(g)|, exhaustively."""
    elems = enumerate_a_plus(n)
    sizes = [support_size(n, e) for e in elems]
    for i, f in enumerate(elems):
        for j, g in enumerate(elems):
            s = support_size(n, add_maps(n, f, g))
            if s > sizes[i] or s > sizes[j]:
                raise WitnessVerificationError(
                    f"support bound fails for {f!r} + {g!r}"
                )
    return f"all {len(elems) ** 2} pairs respect the support bound"


def verify_all(n: int, budget: SearchBudget | None = None) -> VerificationReport:
    """Run the full battery for the given n; see module docstring."""
    check_n(n)
    budget = budget or SearchBudget()
    deadline = time.monotonic() + budget.seconds
    report = VerificationReport(n=n)
    runner = _Runner(report)

    def remaining(min_seconds: float = 0.001) -> SearchBudget:
        return SearchBudget(
            seconds=max(deadline - time.monotonic(), min_seconds),
            node_limit=budget.node_limit,
        )

    elems = enumerate_a_plus(n)
    formulas = rank_formulas(n)
    ranks = RankReport(n=n)
    report.ranks = ranks

    def check_count() -> str:
        expected = a_plus_size(n)
        _require(len(elems) == expected, f"enumerated {len(elems)} != {expected}")
        _require(len(set(elems)) == len(elems), "enumeration repeats an element")
        return f"|elements| = {expected}"

    runner.run("element-count", check_count)

    sg_box: dict[str, FiniteSemigroup] = {}

    def check_closure() -> str:
        sg_box["sg"] = a_plus_semigroup(n)  # raises on any closure violation
        return f"{len(elems)}x{len(elems)} table closed and associative"

    if not runner.run("closure", check_closure):
        return report
    sg = sg_box["sg"]

    if n <= 2:
        def check_oracle() -> str:
            oracle = {r.table for r in affine_closure_oracle(n)}
            direct = {map_table(n, e) for e in elems}
            _require(oracle == direct, "oracle reconstruction differs from enumeration")
            return f"oracle closure of affine maps = the {len(direct)} enumerated maps"

        runner.run("oracle-equivalence", check_oracle)

    runner.run("greens-r-characterization", lambda: _greens_r_characterization(n, sg))
    runner.run("greens-l-constants", lambda: _greens_l_constants(n, sg))
    runner.run("greens-nsupport-classes", lambda: _greens_nsupport_count(n, sg))

    if n <= 4:
        runner.run("support-sum-bound", lambda: _support_sum_bound(n))

    if n >= 2:
        def check_s_generates_constants() -> str:
            s_set = construct_witness(n, "S")
            got = engine.closure(sg, s_set)
            const_idx = IndexSet(
                sg.m,
                (i for i, e in enumerate(elems) if isinstance(e, (Const, ConstZero))),
            )
            _require(got == const_idx, "closure of the cycle constants is not the constants")
            return f"closure(S) is exactly the {len(const_idx)} constant maps"

        runner.run("witness-S-generates-constants", check_s_generates_constants)

        def check_sut_generates() -> str:
            w = construct_witness(n, "S") | construct_witness(n, "T")
            _require(engine.is_generating(sg, w), "S union T fails to generate")
            _require(len(w) == n * (factorial(n) + 1), "S union T has the wrong size")
            return f"S union T generates with {len(w)} elements"

        runner.run("witness-SuT-generates", check_sut_generates)

        if n <= 3:
            def check_i_independent() -> str:
                w = construct_witness(n, "I")
                _require(engine.is_independent(sg, w), "I is not independent")
                return f"I independent, size {len(w)}"

            runner.run("witness-I-independent", check_i_independent)

        if n == 2:
            def check_p_independent() -> str:
                w = construct_witness(2, "P2")
                _require(len(w) == 14 and engine.is_independent(sg, w), "P fails")
                return "14-element set P independent"

            runner.run("witness-P-independent", check_p_independent)

        def check_v_prime() -> str:
            w = construct_witness(n, "V")
            _require(engine.is_prime_subset(sg, w), "V is not prime")
            if n >= 3:
                _require(len(engine.indecomposables(sg)) == 0,
                         "unexpected indecomposable element")
                return f"V prime with {len(w)} elements; every element decomposable"
            return f"V prime with {len(w)} elements"

        runner.run("witness-V-prime", check_v_prime)

    def check_r1() -> str:
        rv = small_rank(sg, remaining())
        ranks.ranks["r1"] = rv
        expected = formulas.ranks["r1"].value
        _require(rv.value == expected, f"r1 {rv.value} != {expected}")
        if n == 2:
            brute = _small_rank_bruteforce(sg, remaining())
            _require(brute.value == rv.value, "brute-force r1 disagrees with shortcut")
            return f"r1 = {rv.value} (shortcut and brute force agree)"
        return f"r1 = {rv.value}"

    runner.run("rank-r1", check_r1)

    def check_r2() -> str:
        wit = None
        if n >= 2:
            wit = construct_witness(n, "S") | construct_witness(n, "T")
        rv = lower_rank_exact(sg, remaining(), witness=wit)
        ranks.ranks["r2"] = rv
        expected = formulas.ranks["r2"].value
        _require(rv.exact and rv.value == expected, f"r2 {rv.value or rv.bounds} != {expected}")
        return f"r2 = {rv.value} ({rv.provenance}; {rv.detail})"

    runner.run("rank-r2", check_r2)

    def check_r3() -> str:
        if n == 1:
            rv = intermediate_rank_bruteforce(sg, remaining())
        else:
            rv = intermediate_rank_verify(n, remaining(), sg=sg)
        ranks.ranks["r3"] = rv
        expected = formulas.ranks["r3"].value
        _require(rv.exact and rv.value == expected, f"r3 {rv.value or rv.bounds} != {expected}")
        return f"r3 = {rv.value} ({rv.provenance})"

    runner.run("rank-r3", check_r3)

    def check_r5() -> str:
        rv = large_rank_exact(sg)
        ranks.ranks["r5"] = rv
        expected = formulas.ranks["r5"].value
        _require(rv.exact and rv.value == expected, f"r5 {rv.value or rv.bounds} != {expected}")
        return f"r5 = {rv.value} ({rv.detail})"

    runner.run("rank-r5", check_r5)

    def check_r4() -> str:
        if n == 1:
            rv = upper_rank_search(sg, remaining())
            ranks.ranks["r4"] = rv
            _require(rv.exact and rv.value == 3, "r4 != 3 at n = 1")
            return "r4 = 3"
        lower = 14 if n == 2 else factorial(n) * n * n + n
        upper = kappa_upper_bound(n)
        if n >= 6:
            ranks.ranks["r4"] = formulas.ranks["r4"]
            return f"r4 = {formulas.ranks['r4'].value} (closed form)"
        if n == 2:
            seed = construct_witness(2, "P2")
            rv = upper_rank_search(sg, remaining(), seed=seed)
            if rv.exact:
                ranks.ranks["r4"] = rv
                _require(lower <= rv.value <= upper, f"r4 = {rv.value} outside [{lower}, {upper}]")
                return f"r4 = {rv.value} (exact search; conjectured {lower})"
            merged = RankValue(
                bounds=(max(rv.lower, lower), min(rv.upper, upper)),
                provenance=PROV_BOUNDS,
                witness=rv.witness,
                witness_labels=rv.witness_labels,
                detail="search budget exhausted",
            )
            ranks.ranks["r4"] = merged
            return f"r4 in [{merged.lower}, {merged.upper}] (budget exhausted)"
        ranks.ranks["r4"] = RankValue(
            bounds=(lower, upper), provenance=PROV_BOUNDS,
            detail="independent-set construction vs stratified cap",
        )
        return f"r4 in [{lower}, {upper}]"

    runner.run("rank-r4", check_r4)

    def check_chain() -> str:
        violations = ranks.chain_violations()
        _require(not violations, "; ".join(violations))
        return "r1 <= r2 <= r3 <= r4 <= r5 holds"

    runner.run("rank-chain", check_chain)

    return report
