import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from weavelab.counterexample import Graph
from weavelab.order import is_lattice, poset_from_relations, subset_lattice
from weavelab.sepsys import (
    InvolutionError,
    NotSymmetricError,
    SeparationSystem,
    SizeCapError,
    Universe,
    gamma_tiebreaker,
    glue_universe,
    graph_separation_universe,
    is_submodular_in_universe,
    is_submodular_system,
    ravel_universe_step,
    removable_pairs,
    unravel_pair_step,
    unravel_Sk,
    unravel_system,
    validate_involution,
)
from weavelab.submod import NotSubmodularError, ValueTable, is_submodular
from weavelab.weave import FullError, enumerate_woven_subsets


def complement_universe(n):
    L = subset_lattice(n)
    full = L.n - 1
    return Universe(L, tuple(full ^ x for x in range(L.n)))


U2 = complement_universe(2)
U3 = complement_universe(3)
CHAIN3 = poset_from_relations(3, [(0, 1), (1, 2)])
ANTI = poset_from_relations(2, [])
CHAIN2 = poset_from_relations(2, [(0, 1)])


def test_validate_involution():
    assert validate_involution(U2.lattice.poset, U2.inv) == (True, None)
    assert validate_involution(CHAIN3, (0, 1, 2)) == (False, ("not-order-reversing", (0, 1)))
    assert validate_involution(ANTI, (1, 0)) == (True, None)
    assert validate_involution(CHAIN3, (1, 1, 2))[1][0] == "not-involutive"
    assert validate_involution(CHAIN3, (0, 1))[1][0] == "length"
    with pytest.raises(InvolutionError):
        SeparationSystem(CHAIN3, (0, 1, 2))


def test_submodular_in_universe():
    assert is_submodular_in_universe(U2, [0, 1, 2, 3]) == (True, None)
    assert is_submodular_in_universe(U2, [1, 2]) == (False, (1, 2))
    assert is_submodular_in_universe(U2, []) == (True, None)
    with pytest.raises(NotSymmetricError):
        is_submodular_in_universe(U2, [1])


def test_submodular_system():
    assert is_submodular_system(U2.system())[0]
    assert not is_submodular_system(SeparationSystem(ANTI, (1, 0)))[0]
    assert is_submodular_system(SeparationSystem(CHAIN2, (1, 0)))[0]


def test_gamma():
    g = gamma_tiebreaker(U2)
    assert g.values == (363, 444, 444, 363)
    g3 = gamma_tiebreaker(U3)
    assert all(g3[s] == g3[U3.inv[s]] for s in range(8))
    unoriented = {min(s, U3.inv[s]) for s in range(8)}
    assert len({g3[s] for s in unoriented}) == len(unoriented)
    assert is_submodular(U3.lattice, g3)[0]


def test_unravel_Sk():
    f = ValueTable(U2.lattice, (0, 1, 1, 0))
    trace = unravel_Sk(U2, f, 1)
    assert trace.ok and trace.pairs == [(0, 3)]
    assert unravel_Sk(U2, f, 0).pairs == []
    full = unravel_Sk(U2, f, 5)
    assert full.ok and full.pairs == [(1, 2), (0, 3)]
    with pytest.raises(NotSymmetricError):
        unravel_Sk(U2, ValueTable(U2.lattice, (0, 1, 0, 0)), 1)


def test_unravel_Sk_prefixes_on_cube():
    f = ValueTable(U3.lattice, [min(bin(x).count("1"), 3 - bin(x).count("1")) for x in range(8)])
    trace = unravel_Sk(U3, f, 10)
    assert trace.ok and len(trace.pairs) == 4
    rest = set(range(8))
    for pair in trace.pairs:
        rest -= set(pair)
        assert oracles.woven_family(rest)


def test_pair_step_examples():
    assert unravel_pair_step(U2.system()) == (1, 2)
    assert unravel_pair_step(SeparationSystem(CHAIN2, (1, 0))) == (0, 1)
    with pytest.raises(NotSubmodularError):
        unravel_pair_step(SeparationSystem(ANTI, (1, 0)))
    assert unravel_pair_step(U2.system([0, 3])) == (0, 1)


def test_unravel_system_traces():
    assert unravel_system(U2.system()).pairs == [(1, 2), (0, 3)]
    assert unravel_system(SeparationSystem(CHAIN2, (1, 0))).pairs == [(0, 1)]
    trace = unravel_system(U3.system())
    assert trace.ok and len(trace.pairs) == 4
    rest = set(range(8))
    for pair in trace.pairs:
        rest -= set(pair)
        assert oracles.woven_poset(oracles.rel_of(U3.lattice.leq), rest)


def test_ravel_universe():
    r = ravel_universe_step(U3, [0, 7])
    assert bin(r).count("1") == 2
    assert ravel_universe_step(U2, [0, 3]) == 1
    assert ravel_universe_step(U2, []) == 3
    with pytest.raises(FullError):
        ravel_universe_step(U2, range(4))


def test_removable_pairs():
    free, blocked = removable_pairs(U2, [0, 1, 2, 3])
    assert free == [(1, 2)] and set(blocked) == {0}


def test_glue_small():
    chain = is_lattice(CHAIN2)
    U, S = glue_universe(chain, [0, 1])
    assert U.n == 2 and U.inv == (1, 0)
    U, S = glue_universe(subset_lattice(2), [0, 1, 2, 3])
    assert U.n == 6 and len(S) == 6
    assert validate_involution(U.lattice.poset, U.inv)[0]
    assert is_submodular_in_universe(U, S)[0]


def test_glue_submodularity_criterion():
    L = subset_lattice(2)
    for members in enumerate_woven_subsets(L):
        U, S = glue_universe(L, members)
        inner = any(p in (1, 2) for p in members)
        spans = not inner or 0 in members or 3 in members
        assert is_submodular_in_universe(U, S)[0] == spans


def test_graph_universe():
    U, f = graph_separation_universe(Graph.from_edges(2, [(0, 1)]))
    assert U.n == 7
    full = max(range(U.n), key=lambda s: f[s])
    assert f[full] == 2 and U.inv[full] == full
    U1, f1 = graph_separation_universe(Graph.from_edges(1, []))
    assert U1.n == 3
    assert graph_separation_universe(Graph.from_edges(3, []))[0].n == 27
    with pytest.raises(SizeCapError):
        graph_separation_universe(Graph.from_edges(6, []))


@settings(max_examples=25)
@given(st.integers(0, 2**16 - 1))
def test_system_unravelling_on_closed_subsets(mask):
    U = complement_universe(4)
    S = [s for s in range(16) if mask >> s & 1 or mask >> (15 ^ s) & 1]
    sys = U.system(S)
    if not is_submodular_system(sys)[0]:
        return
    trace = unravel_system(sys)
    rel = oracles.rel_of(sys.poset.leq)
    rest = set(range(sys.n))
    for pair in trace.pairs:
        assert sys.inv[pair[0]] == pair[-1]
        rest -= set(pair)
        assert oracles.woven_poset(rel, rest)
    assert not rest
