import itertools
from math import factorial

import pytest

from brandt_ranks import engine
from brandt_ranks.affine import Const, ConstZero, add_maps, enumerate_a_plus, map_label
from brandt_ranks.engine import FiniteSemigroup, IndexSet, closure_bits
from brandt_ranks.errors import InvalidParameterError, WitnessVerificationError
from brandt_ranks.ranks import (
    PROV_BOUNDS,
    PROV_SEARCH,
    PROV_WITNESS,
    RankReport,
    RankValue,
    SearchBudget,
    a_plus_strata_caps,
    construct_witness,
    first_factor_lower_bound,
    generating_subset_sweep,
    intermediate_rank_bruteforce,
    intermediate_rank_verify,
    kappa_upper_bound,
    large_rank_exact,
    lower_rank_exact,
    rank_formulas,
    small_rank,
    smallest_prime_subset,
    upper_rank_search,
)

BIG = SearchBudget(seconds=600.0, node_limit=10**9)


def constants_semigroup(n):
    consts = [e for e in enumerate_a_plus(n) if isinstance(e, (ConstZero, Const))]
    return FiniteSemigroup.from_elements(
        consts, lambda f, g: add_maps(n, f, g), labels=[map_label(e) for e in consts]
    )


# --- closed forms ---------------------------------------------------------------


def test_formulas_n1():
    report = rank_formulas(1)
    assert all(report.ranks[k].value == 3 for k in ("r1", "r2", "r3", "r4", "r5"))


def test_formulas_n2():
    r = rank_formulas(2).ranks
    assert r["r1"].value == 1
    assert r["r2"].value == 6
    assert r["r3"].value == 6
    assert r["r4"].bounds == (14, 23)
    assert r["r5"].value == 29


def test_formulas_n3():
    r = rank_formulas(3).ranks
    assert (r["r2"].value, r["r3"].value, r["r5"].value) == (21, 22, 144)
    assert r["r4"].bounds == (57, kappa_upper_bound(3))
    assert kappa_upper_bound(3) == 104


def test_formulas_n6_exact_r4():
    r = rank_formulas(6).ranks
    assert r["r4"].value == 25926  # (6!)*36 + 6
    assert r["r4"].provenance == "formula"


@pytest.mark.parametrize("n", [2, 3, 4, 5, 6, 8, 30])
def test_formula_chain(n):
    report = rank_formulas(n)
    assert report.chain_violations() == []


def test_kappa_values():
    assert kappa_upper_bound(2) == 23
    assert kappa_upper_bound(3) == 104


def test_formulas_reject_zero():
    with pytest.raises(InvalidParameterError):
        rank_formulas(0)


def test_rank_value_validation():
    with pytest.raises(InvalidParameterError):
        RankValue()
    with pytest.raises(InvalidParameterError):
        RankValue(value=3, bounds=(1, 2))


# --- witnesses -------------------------------------------------------------------


@pytest.mark.parametrize("n", [2, 3])
def test_witness_sizes(n):
    assert len(construct_witness(n, "S")) == n
    assert len(construct_witness(n, "T")) == n * factorial(n)
    assert len(construct_witness(n, "SprimeUnionT")) == n * factorial(n) + 2 * n - 2
    assert len(construct_witness(n, "I")) == factorial(n) * n * n + n
    assert len(construct_witness(n, "V")) == n - 1


def test_witness_t_members_are_nsupport(ab2):
    elems = enumerate_a_plus(2)
    from brandt_ranks.affine import NSupport, RawMap, map_table, phi_from_perm, all_permutations

    t = construct_witness(2, "T")
    assert all(isinstance(elems[i], NSupport) for i in t)
    # cross-check: T is exactly the set of automorphism + cycle-constant sums
    oracle = set()
    for sigma in all_permutations(2):
        for c in (Const((0, 1)), Const((1, 0))):
            s = add_maps(2, phi_from_perm(2, sigma), RawMap(map_table(2, c)))
            oracle.add(s.table)
    assert {map_table(2, elems[i]) for i in t} == oracle


def test_witness_p2(ab2):
    p = construct_witness(2, "P2")
    assert len(p) == 14
    assert engine.is_independent(ab2, p)
    with pytest.raises(InvalidParameterError):
        construct_witness(3, "P2")


def test_witness_v_prime(ab3):
    v = construct_witness(3, "V")
    assert sorted(ab3.label_list(v)) == ["xi(3,1)", "xi(3,2)"]
    assert engine.is_prime_subset(ab3, v)


def test_witness_qprime(ab2):
    q = [(0, 0), (0, 1), (1, 1)]
    w = construct_witness(2, "Qprime", q_subset=q)
    assert len(w) == 4 * 3
    assert engine.is_independent(ab2, w)


def test_witness_qprime_rejects_dependent_q():
    # (1,1) = (1,2) + (2,1) inside B_2, so this subset is not independent
    with pytest.raises(InvalidParameterError):
        construct_witness(2, "Qprime", q_subset=[(0, 0), (0, 1), (1, 0)])


def test_witness_qprime_rejects_zero_and_range():
    with pytest.raises(InvalidParameterError):
        construct_witness(2, "Qprime", q_subset=[None])
    with pytest.raises(InvalidParameterError):
        construct_witness(2, "Qprime", q_subset=[(2, 0)])
    with pytest.raises(InvalidParameterError):
        construct_witness(2, "Qprime", q_subset=[])


def test_witness_needs_n_at_least_2():
    with pytest.raises(InvalidParameterError):
        construct_witness(1, "S")
    with pytest.raises(InvalidParameterError):
        construct_witness(2, "nope")


# --- r1 -------------------------------------------------------------------------


def test_small_rank_shortcut(ab2):
    rv = small_rank(ab2)
    assert rv.value == 1


def test_small_rank_brute_force_agreement(ab2):
    from brandt_ranks.ranks import _small_rank_bruteforce

    assert _small_rank_bruteforce(ab2, BIG).value == 1


def test_small_rank_b2(b2):
    from brandt_ranks.ranks import _small_rank_bruteforce

    assert small_rank(b2).value == 1  # not a band
    assert _small_rank_bruteforce(b2, BIG).value == 1  # definitional confirmation


def test_small_rank_a_plus_b1(ab1):
    rv = small_rank(ab1)
    assert rv.value == 3  # the whole three-element semigroup is independent


def test_small_rank_band_b1(b1):
    assert small_rank(b1).value == 2  # both subsets of B_1 are independent


def test_small_rank_one_element():
    one = FiniteSemigroup(["e"], [[0]])
    assert small_rank(one).value == 1


# --- r2 -------------------------------------------------------------------------


def test_first_factor_bounds(ab2, ab3):
    assert first_factor_lower_bound(ab2)[0] == 6
    assert first_factor_lower_bound(ab3)[0] == 21


def test_lower_rank_b2_matches_exhaustive_oracle(b2):
    # oracle: scan subsets by size for the first generating one
    oracle = None
    for k in range(1, b2.m + 1):
        for combo in itertools.combinations(range(b2.m), k):
            if closure_bits(b2.rows, sum(1 << i for i in combo)) == (1 << b2.m) - 1:
                oracle = (k, combo)
                break
        if oracle:
            break
    assert oracle[0] == 2
    rv = lower_rank_exact(b2, BIG)
    assert rv.value == 2
    assert rv.witness == oracle[1]
    assert rv.provenance == PROV_SEARCH


def test_lower_rank_a_plus_b1(ab1):
    rv = lower_rank_exact(ab1, BIG)
    assert rv.value == 3
    assert rv.witness == (0, 1, 2)  # no proper subset generates


def test_lower_rank_a_plus_b2_exhaustive(ab2):
    wit = construct_witness(2, "S") | construct_witness(2, "T")
    rv = lower_rank_exact(ab2, BIG, witness=wit)
    assert rv.value == 6
    assert rv.provenance == PROV_SEARCH  # the 5-subset sweep completed
    assert set(rv.witness) == set(wit)


def test_lower_rank_a_plus_b3_witness_bound_match(ab3):
    wit = construct_witness(3, "S") | construct_witness(3, "T")
    rv = lower_rank_exact(ab3, BIG, witness=wit)
    assert rv.value == 21
    assert rv.provenance == PROV_WITNESS


def test_lower_rank_bound_match_skips_sweep(ab2):
    # with only 10 nodes the sweep cannot run, but the first-factor bound
    # already matches the witness size, so the value is still exact
    wit = construct_witness(2, "S") | construct_witness(2, "T")
    rv = lower_rank_exact(ab2, SearchBudget(seconds=600, node_limit=10), witness=wit)
    assert rv.exact and rv.value == 6
    assert rv.provenance == PROV_WITNESS


def test_lower_rank_budget_exhaustion(ab2):
    # a non-minimal generating witness (size 7) with no budget to sweep
    wit = construct_witness(2, "S") | construct_witness(2, "T")
    wit.add(5)
    rv = lower_rank_exact(ab2, SearchBudget(seconds=600, node_limit=10), witness=wit)
    assert not rv.exact
    assert rv.bounds == (6, 7)


def test_lower_rank_rejects_non_generating_witness(ab2):
    with pytest.raises(WitnessVerificationError):
        lower_rank_exact(ab2, BIG, witness=[0, 1, 2])


def test_generating_subset_sweep_none_at_5(ab2):
    complete, found = generating_subset_sweep(ab2, 5, BIG)
    assert complete and found == []


# --- r3 -------------------------------------------------------------------------


def test_intermediate_rank_n2(ab2):
    rv = intermediate_rank_verify(2, BIG, sg=ab2)
    assert rv.value == 6
    assert rv.provenance == PROV_SEARCH


def test_intermediate_rank_n3(ab3):
    rv = intermediate_rank_verify(3, BIG, sg=ab3)
    assert rv.value == 22
    assert rv.provenance == PROV_WITNESS


def test_intermediate_rank_bruteforce_b1(ab1):
    assert intermediate_rank_bruteforce(ab1, BIG).value == 3


def test_intermediate_rank_rejects_n1():
    with pytest.raises(InvalidParameterError):
        intermediate_rank_verify(1)


@pytest.mark.parametrize("n", [2, 3])
def test_independent_generating_witnesses_respect_size_cap(n, ab2, ab3):
    # every independent generating set is capped at n(n!) + 2n - 2
    sg = ab2 if n == 2 else ab3
    cap = n * factorial(n) + 2 * n - 2
    rv = intermediate_rank_verify(n, BIG, sg=sg)
    assert len(rv.witness) == rv.value <= cap
    sut = construct_witness(n, "S") | construct_witness(n, "T")
    if engine.is_independent(sg, sut) and engine.is_generating(sg, sut):
        assert len(sut) <= cap


# --- r4 -------------------------------------------------------------------------


def test_upper_rank_one_element():
    one = FiniteSemigroup(["e"], [[0]])
    assert upper_rank_search(one, BIG).value == 1


def test_upper_rank_a_plus_b1(ab1):
    assert upper_rank_search(ab1, BIG).value == 3


def test_upper_rank_constants_b3_matches_scan_oracle():
    cb3 = constants_semigroup(3)
    # full scan over all 2^10 subsets
    best = 0
    for bits in range(1, 1 << cb3.m):
        if bits.bit_count() > best and engine.is_independent(
            cb3, IndexSet.from_bits(cb3.m, bits)
        ):
            best = bits.bit_count()
    assert best == 5  # floor(9/4) + 3
    rv = upper_rank_search(cb3, BIG)
    assert rv.value == best
    assert rv.provenance == PROV_SEARCH


def test_upper_rank_deterministic():
    cb3 = constants_semigroup(3)
    a = upper_rank_search(cb3, BIG)
    b = upper_rank_search(cb3, BIG)
    assert a.value == b.value and a.witness == b.witness


def test_upper_rank_budget_exhaustion(ab2):
    rv = upper_rank_search(ab2, SearchBudget(seconds=600, node_limit=50))
    assert not rv.exact
    assert rv.provenance == PROV_BOUNDS
    assert rv.bounds[0] <= rv.bounds[1] == 29


def test_upper_rank_rejects_bad_seed(ab2):
    with pytest.raises(WitnessVerificationError):
        upper_rank_search(ab2, BIG, seed=[0, ab2.index_of("xi(1,2)")])


def test_i_witness_independent(ab2, ab3):
    assert engine.is_independent(ab2, construct_witness(2, "I"))
    assert engine.is_independent(ab3, construct_witness(3, "I"))


# --- r5 -------------------------------------------------------------------------


def test_large_rank_a_plus_b2(ab2):
    rv = large_rank_exact(ab2)
    assert rv.value == 29
    assert "xi(1,2)" in rv.detail  # singleton prime subset found
    assert len(rv.witness) == 28


def test_large_rank_a_plus_b3(ab3):
    rv = large_rank_exact(ab3)
    assert rv.value == 144
    assert len(rv.witness) == 143  # smallest prime subset has size 2


def test_smallest_prime_subset_n3_matches_naive_scan(ab3):
    found = smallest_prime_subset(ab3, 3)
    assert len(found) == 2
    # naive oracle: no singleton is prime, some pair is
    assert all(not engine.is_prime_subset(ab3, [i]) for i in range(ab3.m))
    first_pair = None
    for pair in itertools.combinations(range(ab3.m), 2):
        if engine.is_prime_subset(ab3, pair):
            first_pair = pair
            break
    assert first_pair is not None
    assert engine.is_prime_subset(ab3, found)


def test_large_rank_b2(b2):
    rv = large_rank_exact(b2)
    assert rv.value == 5  # B_2 has indecomposable elements


def test_large_rank_one_element():
    assert large_rank_exact(FiniteSemigroup(["e"], [[0]])).value == 1


def test_large_rank_cap_bounds():
    # right-zero semigroup: a + b = b; every element decomposable (a + b = b
    # with a free), and {x} prime for each x, so a cap below 1 cannot apply;
    # force the bounds path with a semigroup whose smallest prime set is big.
    # Z_4 under addition: primes must catch 1 = 2+3, 2 = 1+1, 3 = 1+2, 0 = 2+2
    z4 = FiniteSemigroup(
        ["0", "1", "2", "3"], [[(i + j) % 4 for j in range(4)] for i in range(4)]
    )
    rv = large_rank_exact(z4, size_cap=1)
    assert not rv.exact
    assert rv.bounds[1] == 3


# --- strata caps ------------------------------------------------------------------


def test_strata_caps_cover_all_elements(ab2):
    caps = a_plus_strata_caps(2, ab2)
    union = 0
    for stratum, _cap in caps:
        union |= stratum.bits
    assert union == (1 << 29) - 1
    assert [cap for _s, cap in caps] == [3, 12, 8]


def test_chain_violation_detection():
    report = RankReport(n=2)
    report.ranks["r1"] = RankValue(value=4)
    report.ranks["r2"] = RankValue(value=3)
    assert report.chain_violations()


# --- differential checks against brute force ------------------------------------


def _sub_semigroup(sg, seed_indices):
    bits = closure_bits(sg.rows, sum(1 << i for i in seed_indices))
    idx = [i for i in range(sg.m) if bits >> i & 1]
    pos = {i: p for p, i in enumerate(idx)}
    table = [[pos[sg.rows[a][b]] for b in idx] for a in idx]
    return FiniteSemigroup([sg.labels[i] for i in idx], table)


def test_searches_match_brute_force_on_random_subsemigroups(ab2):
    import random

    rng = random.Random(7)
    checked = 0
    while checked < 25:
        sub = _sub_semigroup(ab2, rng.sample(range(29), rng.randint(1, 4)))
        if sub.m > 14:
            continue
        best = 0
        for bits in range(1, 1 << sub.m):
            if bits.bit_count() > best and engine.is_independent(
                sub, IndexSet.from_bits(sub.m, bits)
            ):
                best = bits.bit_count()
        assert upper_rank_search(sub, BIG).value == best
        mingen = None
        for k in range(1, sub.m + 1):
            for combo in itertools.combinations(range(sub.m), k):
                if closure_bits(sub.rows, sum(1 << i for i in combo)) == (1 << sub.m) - 1:
                    mingen = k
                    break
            if mingen:
                break
        assert lower_rank_exact(sub, BIG).value == mingen
        checked += 1
