"""Separation systems (posets with an order-reversing involution) and universes."""
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product

import numpy as np

from .order import InvariantViolation, LatticeWitness, Poset, is_lattice, maximal_elements
from .submod import NotSubmodularError, ValueTable, as_rational, is_submodular, tie_breaker_rho
from .weave import FullError, d_classes, infimum_of, is_woven_in, is_woven_poset, member_mask


class InvolutionError(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"not an order-reversing involution: {witness}")


class NotSymmetricError(ValueError):
    """Element set not closed under the involution, or function not symmetric."""


class SizeCapError(ValueError):
    pass


def validate_involution(P, inv):
    """Check ``inv`` is an involution reversing the order of P.

    Returns ``(True, None)`` or ``(False, witness)`` where the witness is
    ``("length", n)``, ``("not-involutive", s)`` or ``("not-order-reversing", (s, t))``.
    """
    inv = np.asarray(inv, dtype=np.int64)
    if inv.shape != (P.n,) or (P.n and (inv.min() < 0 or inv.max() >= P.n)):
        return False, ("length", len(inv))
    bad = np.nonzero(inv[inv] != np.arange(P.n))[0]
    if bad.size:
        return False, ("not-involutive", int(bad[0]))
    # s <= t must give inv(t) <= inv(s)
    flipped = P.leq[np.ix_(inv, inv)].T
    bad = np.argwhere(P.leq & ~flipped)
    if bad.size:
        return False, ("not-order-reversing", (int(bad[0][0]), int(bad[0][1])))
    return True, None


@dataclass(frozen=True, eq=False)
class SeparationSystem:
    poset: Poset
    inv: tuple

    def __post_init__(self):
        object.__setattr__(self, "inv", tuple(int(x) for x in self.inv))
        ok, wit = validate_involution(self.poset, self.inv)
        if not ok:
            raise InvolutionError(wit)

    @property
    def n(self):
        return self.poset.n

    def unoriented(self, s):
        """Canonical member (lower index) of ``{s, inv(s)}``."""
        return min(s, self.inv[s])

    def pair(self, s):
        return tuple(sorted({s, self.inv[s]}))

    def pairs(self):
        return sorted({self.pair(s) for s in range(self.n)})

    def restrict(self, elements):
        elements = sorted(elements)
        pos = {x: i for i, x in enumerate(elements)}
        return SeparationSystem(self.poset.restrict(elements), tuple(pos[self.inv[x]] for x in elements))


@dataclass(frozen=True, eq=False)
class Universe:
    lattice: object
    inv: tuple

    def __post_init__(self):
        object.__setattr__(self, "inv", tuple(int(x) for x in self.inv))
        ok, wit = validate_involution(self.lattice.poset, self.inv)
        if not ok:
            raise InvolutionError(wit)

    @property
    def n(self):
        return self.lattice.n

    def pair(self, s):
        return tuple(sorted({s, self.inv[s]}))

    def system(self, elements=None):
        sys = SeparationSystem(self.lattice.poset, self.inv)
        return sys if elements is None else sys.restrict(elements)


@dataclass
class PairTrace:
    start: tuple
    pairs: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    status: str = "ok"

    @property
    def ok(self):
        return self.status == "ok"

    def lines(self, label=str):
        out = []
        for i, (pair, cert) in enumerate(zip(self.pairs, self.certificates), 1):
            names = " ".join(label(s) for s in pair)
            out.append(f"step {i} remove {names} submodular={'true' if cert else 'false'}")
        out.append("result ok" if self.ok else "result stuck")
        return out


def _closed(inv, S):
    S = set(S)
    return all(inv[s] in S for s in S)


def is_submodular_in_universe(U, S):
    """Structural submodularity: S is inv-closed and woven in the universe lattice."""
    if not _closed(U.inv, S):
        raise NotSymmetricError("element set is not closed under the involution")
    return is_woven_in(U.lattice, sorted(S))


def is_submodular_system(S):
    """Intrinsic submodularity: every pair has a supremum or infimum inside S."""
    return is_woven_poset(S.poset)


def gamma_tiebreaker(U):
    """``gamma(s) = rho(s) + rho(inv s)``; symmetric and injective on unoriented pairs."""
    rho = tie_breaker_rho(U.lattice)
    return ValueTable(U.lattice, [rho[s] + rho[U.inv[s]] for s in range(U.n)])


def _pair_witnesses(U, S):
    """Map each unoriented pair whose removal breaks wovenness to a witness pair."""
    idx = np.array(sorted(S), dtype=np.int64)
    if idx.size < 2:
        return {}
    inv = np.asarray(U.inv, dtype=np.int64)
    uid = np.minimum(np.arange(U.n), inv)
    ext = np.append(member_mask(U.n, idx), False)
    uid_ext = np.append(uid, -1)
    J = np.asarray(U.lattice.join)[np.ix_(idx, idx)]
    M = np.asarray(U.lattice.meet)[np.ix_(idx, idx)]
    inJ, inM = ext[J], ext[M]
    target = np.where(inJ, uid_ext[J], uid_ext[M])
    single = (inJ | inM) & (~inJ | ~inM | (uid_ext[J] == uid_ext[M]))
    own = uid[idx]
    hit = single & (target != own[:, None]) & (target != own[None, :])
    hit &= np.triu(np.ones_like(hit), 1)
    qs, rs = np.nonzero(hit)
    if qs.size == 0:
        return {}
    ts = target[qs, rs]
    _, first = np.unique(ts, return_index=True)
    return {int(ts[k]): (int(idx[qs[k]]), int(idx[rs[k]])) for k in first}


def removable_pairs(U, S):
    """Unoriented pairs ``{s, inv s}`` of S whose removal keeps S submodular in U,
    each re-checked; also returns the witness map for the blocked ones."""
    ok, wit = is_submodular_in_universe(U, S)
    if not ok:
        raise NotSubmodularError(wit)
    blocked = _pair_witnesses(U, S)
    free = []
    for s in sorted({min(s, U.inv[s]) for s in S}):
        if s in blocked:
            continue
        rest = [x for x in S if x not in (s, U.inv[s])]
        if not is_woven_in(U.lattice, sorted(rest))[0]:
            raise InvariantViolation(f"pair {U.pair(s)} was not blocked but fails re-check")
        free.append(U.pair(s))
    return free, blocked


def unravel_Sk(U, f, k):
    """Unravel ``S_k = {f < k}`` pair by pair in decreasing ``f + c * gamma`` order."""
    if any(f[s] != f[U.inv[s]] for s in range(U.n)):
        raise NotSymmetricError("order function is not symmetric")
    ok, wit = is_submodular(U.lattice, f)
    if not ok:
        raise NotSubmodularError(wit)
    k = as_rational(k)
    S = [s for s in range(U.n) if f[s] < k]
    gamma = gamma_tiebreaker(U)
    distinct = sorted(set(f.values))
    eps = Fraction(1) if len(distinct) < 2 else Fraction(min(b - a for a, b in zip(distinct, distinct[1:])))
    c = eps / (1 + max(gamma.values))
    h = {s: f[s] + c * gamma[s] for s in S}
    trace = PairTrace(tuple(S))
    rest = set(S)
    for s in sorted({min(s, U.inv[s]) for s in S}, key=lambda s: h[s], reverse=True):
        pair = U.pair(s)
        rest.difference_update(pair)
        ok, _ = is_submodular_in_universe(U, rest)
        trace.pairs.append(pair)
        trace.certificates.append(ok)
        if not ok:
            trace.status = "stuck"
            break
    return trace


def unravel_pair_step(S):
    """Return an unoriented pair whose removal keeps the system intrinsically submodular.

    Follows the constructive case split on the maximal elements ``M``:
    a minimal proper class with two or more members, then ``|M| >= 2``,
    then a single maximal element.  The result is re-checked.
    """
    ok, wit = is_submodular_system(S)
    if not ok:
        raise NotSubmodularError(wit)
    if S.n == 0:
        raise ValueError("empty separation system")
    P, inv = S.poset, S.inv
    M = maximal_elements(P)
    Mset = frozenset(M)
    classes = d_classes(P)
    big = [k for k, v in classes.items() if len(v) >= 2 and k != Mset]
    if big:
        key = min(big, key=lambda k: (len(k), sorted(k)))
        inf = infimum_of(P, key)
        if inf is None:
            raise InvariantViolation(f"class {sorted(key)} has no infimum")
        x = P.maximal_of(v for v in classes[key] if v != inf)[0]
        if P.upper_covers(x) != [inf] or x == inv[inf]:
            raise InvariantViolation(f"class case failed at element {x}")
        chosen = x
    elif len(M) >= 2:
        inf_m = infimum_of(P, M)
        cands = [m for m in M if inv[m] != inf_m]
        if not cands:
            raise InvariantViolation("no maximal element with inverse distinct from inf M")
        chosen = cands[0]
    else:
        (m,) = M
        if set(range(S.n)) <= {m, inv[m]}:
            chosen = m
        else:
            pool = [s for s in range(S.n) if s != m and s != inv[m]]
            chosen = P.maximal_of(pool)[0]
    pair = S.pair(chosen)
    rest = [s for s in range(S.n) if s not in pair]
    ok, wit = is_woven_poset(P.restrict(rest))
    if not ok:
        raise InvariantViolation(f"removing {pair} broke submodularity at {wit}")
    return pair


def unravel_system(S):
    """Iterate :func:`unravel_pair_step` down to the empty system; pairs use S's indices."""
    ok, wit = is_submodular_system(S)
    if not ok:
        raise NotSubmodularError(wit)
    trace = PairTrace(tuple(range(S.n)))
    rest = list(range(S.n))
    while rest:
        local = unravel_pair_step(S.restrict(rest))
        pair = tuple(rest[i] for i in local)
        rest = [s for s in rest if s not in pair]
        ok, _ = is_woven_poset(S.poset.restrict(rest))
        trace.pairs.append(pair)
        trace.certificates.append(ok)
        if not ok:
            raise InvariantViolation(f"intermediate system after removing {pair} is not submodular")
    return trace


def ravel_universe_step(U, S):
    """Maximal element ``r`` of ``U - S``; ``S + {r, inv r}`` is re-checked submodular."""
    inside = member_mask(U.n, S)
    if inside.all():
        raise FullError("S already equals U")
    outside = ~inside
    strict = np.asarray(U.lattice.leq) & ~np.eye(U.n, dtype=bool)
    above = (strict & outside[None, :]).any(axis=1)
    r = int(np.nonzero(outside & ~above)[0][0])
    grown = sorted(set(S) | {r, U.inv[r]})
    ok, wit = is_submodular_in_universe(U, grown)
    if not ok:
        raise InvariantViolation(f"adding {U.pair(r)} broke submodularity at {wit}")
    return r


def glue_universe(L, P):
    """Glue L to its dual along top/bottom; returns ``(universe, S)`` with ``S = P u P'``.

    Elements ``0..n-1`` are L itself; the dual copies of the other elements
    follow in index order.  ``inv`` maps each element to its dual copy and
    swaps top with bottom.  S is re-checked submodular whenever P is woven
    and either contains t or b or has no inner element.
    """
    n = L.n
    t, b = L.top, L.bottom
    if n < 2:
        raise ValueError("lattice needs a distinct top and bottom")
    inner = [x for x in range(n) if x not in (t, b)]
    inner_set = set(inner)
    copy = {t: b, b: t}
    for i, x in enumerate(inner):
        copy[x] = n + i
    size = n + len(inner)
    leq = np.zeros((size, size), dtype=bool)
    leq[:n, :n] = L.leq
    ii = np.array(inner, dtype=np.int64)
    cc = np.array([copy[x] for x in inner], dtype=np.int64)
    if ii.size:
        leq[np.ix_(cc, cc)] = np.asarray(L.leq)[np.ix_(ii, ii)].T
    leq[b, :] = True
    leq[:, t] = True
    labels = [L.label(x) for x in range(n)] + [L.label(x) + "'" for x in inner]
    inv = [0] * size
    for x in range(n):
        inv[x] = copy[x]
        inv[copy[x]] = x
    glued = is_lattice(Poset(leq, labels, check=False))
    if isinstance(glued, LatticeWitness):
        raise InvariantViolation(f"glued poset is not a lattice: {glued}")
    U = Universe(glued, tuple(inv))
    S = sorted(set(P) | {copy[p] for p in P})
    # an inner x and an inner y' have corners t and b, so one of them must be present
    spans = not any(p in inner_set for p in P) or t in P or b in P
    if spans and is_woven_in(L, sorted(P))[0]:
        ok, wit = is_submodular_in_universe(U, S)
        if not ok:
            raise InvariantViolation(f"glued system is not submodular at {wit}")
    return U, S


GRAPH_CAP = 5


def graph_separation_universe(G, cap=GRAPH_CAP):
    """Universe of all separations ``(A, B)`` of a graph with ``f = |A & B|``."""
    n = G.n
    if n > cap:
        raise SizeCapError(f"{n} vertices exceed the separation enumeration cap {cap}")
    edges = G.edges()
    seps = []
    # per vertex: 0 = A only, 1 = B only, 2 = both
    for sides in product(range(3), repeat=n):
        A = sum(1 << v for v in range(n) if sides[v] != 1)
        B = sum(1 << v for v in range(n) if sides[v] != 0)
        if any({sides[u], sides[v]} == {0, 1} for u, v in edges):
            continue
        seps.append((A, B))
    seps.sort()
    index = {s: i for i, s in enumerate(seps)}
    k = len(seps)
    leq = np.zeros((k, k), dtype=bool)
    for i, (A, B) in enumerate(seps):
        for j, (C, D) in enumerate(seps):
            leq[i, j] = (A & ~C) == 0 and (D & ~B) == 0
    labels = [f"({_vs(A)}|{_vs(B)})" for A, B in seps]
    lat = is_lattice(Poset(leq, labels, check=False))
    if isinstance(lat, LatticeWitness):
        raise InvariantViolation(f"separations do not form a lattice: {lat}")
    U = Universe(lat, tuple(index[(B, A)] for A, B in seps))
    f = ValueTable(lat, [bin(A & B).count("1") for A, B in seps])
    ok, wit = is_submodular(lat, f)
    if not ok:
        raise InvariantViolation(f"order function not submodular at {wit}")
    return U, f


def _vs(mask):
    return ",".join(str(v) for v in range(mask.bit_length()) if mask >> v & 1)
