import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from weavelab.order import InvariantViolation, Lattice, is_distributive, is_lattice, poset_from_relations, subset_lattice
from weavelab.weave import (
    EnumerationCapError,
    FullError,
    NotWovenError,
    SetFamily,
    d_classes,
    enumerate_posets,
    enumerate_woven_subsets,
    find_unique_cover_element,
    is_woven_family,
    is_woven_in,
    is_woven_poset,
    min_class_witness,
    ravel_step,
    removable_elements,
    unravel_poset,
    unravel_search,
)

SQ = subset_lattice(2)  # 0 = {}, 1 = {1}, 2 = {2}, 3 = {1,2}
M3 = is_lattice(poset_from_relations(5, [(0, 1), (0, 2), (0, 3), (1, 4), (2, 4), (3, 4)]))
V = poset_from_relations(3, [(0, 2), (1, 2)])
CHAIN3 = poset_from_relations(3, [(0, 1), (1, 2)])
ANTICHAIN2 = poset_from_relations(2, [])
HEXAGON = poset_from_relations(6, [(0, 1), (0, 2), (1, 3), (1, 4), (2, 3), (2, 4), (3, 5), (4, 5)])
# {}, {1}, {2} ordered by inclusion
VEE = poset_from_relations(3, [(0, 1), (0, 2)])


def small_lattices(max_n=5):
    for n in range(1, max_n + 1):
        for P in enumerate_posets(n):
            L = is_lattice(P)
            if isinstance(L, Lattice):
                yield L


LATTICES = list(small_lattices())


# ------------------------------------------------------------------ wovenness


def test_woven_in_square():
    assert is_woven_in(SQ, [1, 2]) == (False, (1, 2))
    assert is_woven_in(SQ, [0, 1, 2]) == (True, None)


def test_woven_in_m3():
    assert is_woven_in(M3, [1, 2, 4])[0]
    assert not is_woven_in(M3, [1, 2])[0]


def test_woven_poset_examples():
    assert is_woven_poset(V) == (True, None)
    assert is_woven_poset(ANTICHAIN2) == (False, (0, 1))
    # the infimum b of x1, x2 exists even though the join does not
    assert is_woven_poset(HEXAGON) == (True, None)


def test_woven_family_examples():
    assert is_woven_family(SetFamily.from_sets(2, [()]))[0]
    assert not is_woven_family(SetFamily.from_sets(2, [(1,), (2,)]))[0]
    assert is_woven_family(SetFamily.from_sets(2, [(1,), (2,), (1, 2)]))[0]


def test_large_ground_family_uses_masks():
    F = SetFamily.from_sets(20, [(1,), (20,)])
    ok, (x, y) = is_woven_family(F)
    assert not ok and {x, y} == {1, 1 << 19}
    assert is_woven_family(SetFamily.from_sets(20, [(1,), (20,), (1, 20)]))[0]


def test_family_rejects_bad_sets():
    with pytest.raises(ValueError):
        SetFamily.from_sets(2, [(3,)])
    with pytest.raises(ValueError):
        SetFamily.from_sets(2, [(1,), (1,)])


@pytest.mark.parametrize("ground", [0, 1, 2, 3])
def test_family_matches_lattice_check(ground):
    L = subset_lattice(ground)
    subsets = range(1 << ground)
    for m in range(1 << (1 << ground)):
        sets = [s for s in subsets if m >> s & 1]
        F = SetFamily(ground, tuple(sets))
        assert is_woven_family(F)[0] == is_woven_in(L, sets)[0] == oracles.woven_family(sets)


@settings(max_examples=200)
@given(st.sets(st.integers(0, 15), max_size=16))
def test_family_matches_lattice_check_ground4(sets):
    sets = sorted(sets)
    F = SetFamily(4, tuple(sets))
    assert is_woven_family(F)[0] == is_woven_in(subset_lattice(4), sets)[0] == oracles.woven_family(sets)


# ------------------------------------------------------------- removal, ravel


def test_removable_examples():
    assert removable_elements(SQ, [0, 1, 2]) == [1, 2]
    assert removable_elements(SQ, [2]) == [2]
    assert removable_elements(M3, [1, 2, 4]) == [1, 2]


def test_removable_needs_woven_input():
    with pytest.raises(NotWovenError):
        removable_elements(SQ, [1, 2])


@pytest.mark.parametrize("L", LATTICES[:60], ids=lambda L: f"n{L.n}")
def test_removable_matches_bruteforce(L):
    rel = oracles.rel_of(L.leq)
    for members in enumerate_woven_subsets(L):
        expect = [p for p in members if oracles.woven_in(L.n, rel, [x for x in members if x != p])]
        assert removable_elements(L, members) == expect


def test_ravel_examples():
    assert ravel_step(SQ, [0]) == 3
    assert ravel_step(SQ, [0, 3]) == 1
    assert ravel_step(SQ, [0, 1, 2]) == 3
    with pytest.raises(FullError):
        ravel_step(SQ, [0, 1, 2, 3])


def test_ravel_keeps_wovenness_everywhere():
    for L in LATTICES:
        rel = oracles.rel_of(L.leq)
        for members in enumerate_woven_subsets(L):
            if len(members) == L.n:
                continue
            p = ravel_step(L, members)
            assert p not in members
            assert not any(L.leq[p, q] and q != p and q not in members for q in range(L.n))
            assert oracles.woven_in(L.n, rel, set(members) | {p})


# ----------------------------------------------------------------- unravelling


def test_greedy_chain_top_down_is_valid():
    C = is_lattice(poset_from_relations(4, [(0, 1), (1, 2), (2, 3)]))
    trace = unravel_search(C, range(4))
    assert trace.ok and len(trace.removals) == 4
    assert all(c.woven for c in trace.certificates)


def test_greedy_full_square():
    trace = unravel_search(SQ, range(4))
    assert trace.ok and trace.removals[0] == 0 and len(trace.removals) == 4
    rest = {0, 1, 2, 3}
    for x in trace.removals:
        rest.discard(x)
        assert oracles.woven_family(rest)


def test_backtracking_and_lines():
    trace = unravel_search(SQ, [0, 1, 2], "backtracking")
    assert trace.ok and trace.removals[0] != 0
    assert trace.lines()[-1] == "result ok"
    assert trace.lines()[0].startswith("step 1 remove")


def test_unknown_strategy():
    with pytest.raises(ValueError):
        unravel_search(SQ, [0], "random")


def test_backtracking_agrees_with_reachability_oracle():
    L = subset_lattice(3)
    table = oracles.unravellable_families([oracles.woven_family([s for s in range(8) if m >> s & 1]) for m in range(256)])
    rng = np.random.default_rng(0)
    for m in rng.choice(256, size=60, replace=False):
        members = [s for s in range(8) if int(m) >> s & 1]
        if not oracles.woven_family(members):
            continue
        assert unravel_search(L, members, "backtracking").ok == table[int(m)]


def test_distributive_removable_or_record():
    for L in LATTICES:
        if not is_distributive(L)[0]:
            continue
        for members in enumerate_woven_subsets(L):
            if not members:
                continue
            if not removable_elements(L, members):
                trace = unravel_search(L, members, "backtracking")
                assert trace.status == "exhausted"


# ----------------------------------------------------------------- woven posets


def test_unique_cover_examples():
    assert find_unique_cover_element(V) == (0, "upper")
    assert find_unique_cover_element(CHAIN3) == (0, "upper")
    assert find_unique_cover_element(VEE) == (1, "lower")
    with pytest.raises(NotWovenError):
        find_unique_cover_element(ANTICHAIN2)


def test_unravel_poset_examples():
    assert unravel_poset(V).removals == [0, 1, 2]
    assert unravel_poset(poset_from_relations(1, [])).removals == [0]
    assert unravel_poset(HEXAGON).ok


def test_delete_unique_cover_keeps_woven():
    for n in range(2, 6):
        for P in enumerate_posets(n):
            if not is_woven_poset(P)[0]:
                continue
            cov = P.cover_matrix
            for x in range(n):
                if cov[:, x].sum() == 1 or cov[x].sum() == 1:
                    rest = [y for y in range(n) if y != x]
                    assert oracles.woven_poset(oracles.rel_of(P.leq), rest)


def test_d_classes():
    assert d_classes(V) == {frozenset({2}): (0, 1, 2)}
    assert d_classes(ANTICHAIN2) == {frozenset({0}): (0,), frozenset({1}): (1,)}
    assert d_classes(VEE) == {frozenset({1}): (1,), frozenset({2}): (2,), frozenset({1, 2}): (0,)}


def test_min_class_witness():
    assert min_class_witness(V) == 0
    assert min_class_witness(CHAIN3) == 1
    assert min_class_witness(VEE) is None
    with pytest.raises(NotWovenError):
        min_class_witness(ANTICHAIN2)


def test_min_class_witness_on_woven_posets():
    for n in range(2, 6):
        for P in enumerate_posets(n):
            if is_woven_poset(P)[0]:
                try:
                    min_class_witness(P)
                except InvariantViolation as exc:  # pragma: no cover
                    pytest.fail(str(exc))


# ------------------------------------------------------------------ enumeration


def test_woven_subsets_of_square():
    subs = list(enumerate_woven_subsets(SQ))
    assert len(subs) == 15 and () in subs and (1, 2) not in subs


def test_poset_counts():
    assert [sum(1 for _ in enumerate_posets(n)) for n in range(5)] == [1, 1, 3, 19, 219]
    assert {P.leq.tobytes() for P in enumerate_posets(3)} == oracles.labeled_posets_bruteforce(3)
    assert sum(is_woven_poset(P)[0] for P in enumerate_posets(4)) == 116


def test_enumeration_caps(monkeypatch):
    with pytest.raises(EnumerationCapError):
        list(enumerate_posets(7))
    monkeypatch.setenv("WEAVELAB_ENUM_CAP", "3")
    with pytest.raises(EnumerationCapError):
        list(enumerate_woven_subsets(SQ))


@settings(max_examples=40)
@given(st.integers(0, 10**6))
def test_woven_poset_matches_oracle(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(1, 7))
    pairs = [(a, b) for a, b in itertools.combinations(range(n), 2) if rng.random() < 0.4]
    P = poset_from_relations(n, pairs)
    assert is_woven_poset(P)[0] == oracles.woven_poset(oracles.rel_of(P.leq), range(n))
