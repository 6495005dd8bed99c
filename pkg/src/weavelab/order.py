"""Finite posets and lattices on dense integer elements ``0..n-1``."""
from dataclasses import dataclass
from functools import cached_property, lru_cache

import numpy as np

from . import _kernels


class CycleError(ValueError):
    """Relations whose reflexive-transitive closure is not antisymmetric."""

    def __init__(self, cycle):
        self.cycle = list(cycle)
        super().__init__(f"relations contain a cycle: {self.cycle}")


class EmptyPosetError(ValueError):
    pass


class SizeLimitError(ValueError):
    pass


class InvariantViolation(RuntimeError):
    """A guaranteed property failed its computational re-check."""


class Poset:
    """Immutable finite partial order.

    ``leq[a, b]`` is True iff ``a <= b``.  Elements are the indices
    ``0..n-1``; human-readable names live in the optional ``labels`` tuple.
    Construction from a matrix verifies reflexivity, antisymmetry and
    transitivity unless ``check=False``.
    """

    def __init__(self, leq, labels=None, *, check=True):
        leq = np.array(leq, dtype=bool)
        if leq.ndim != 2 or leq.shape[0] != leq.shape[1]:
            raise ValueError("order matrix must be square")
        leq.setflags(write=False)
        self.leq = leq
        self.n = leq.shape[0]
        if labels is not None:
            labels = tuple(str(x) for x in labels)
            if len(labels) != self.n:
                raise ValueError("one label per element required")
        self.labels = labels
        if check:
            _check_order(leq)

    @classmethod
    def from_relations(cls, n, pairs, labels=None):
        return poset_from_relations(n, pairs, labels)

    def __len__(self):
        return self.n

    def __repr__(self):
        return f"Poset(n={self.n}, covers={len(self.covers)})"

    def __eq__(self, other):
        return isinstance(other, Poset) and np.array_equal(self.leq, other.leq)

    def __hash__(self):
        return hash((self.n, self.leq.tobytes()))

    def label(self, x):
        return self.labels[x] if self.labels is not None else str(x)

    def le(self, a, b):
        return bool(self.leq[a, b])

    def lt(self, a, b):
        return a != b and bool(self.leq[a, b])

    @cached_property
    def linear_extension(self):
        # x < y implies |down(x)| < |down(y)|
        return np.argsort(self.leq.sum(axis=0), kind="stable").astype(np.int64)

    @cached_property
    def _rank_up_bits(self):
        order = self.linear_extension
        return _kernels.pack_rows(self.leq[:, order])

    @cached_property
    def _rank_down_bits(self):
        rev = self.linear_extension[::-1].copy()
        return _kernels.pack_rows(self.leq.T[:, rev])

    @cached_property
    def cover_matrix(self):
        strict = self.leq & ~np.eye(self.n, dtype=bool)
        cov = _kernels.cover_matrix(_kernels.pack_rows(strict), _kernels.pack_rows(strict.T))
        cov = np.asarray(cov, dtype=bool)
        cov.setflags(write=False)
        return cov

    @cached_property
    def covers(self):
        return tuple((int(a), int(b)) for a, b in np.argwhere(self.cover_matrix))

    def upper_covers(self, x):
        return [int(y) for y in np.nonzero(self.cover_matrix[x])[0]]

    def lower_covers(self, x):
        return [int(y) for y in np.nonzero(self.cover_matrix[:, x])[0]]

    @cached_property
    def join_table(self):
        """Supremum table, -1 where no unique least upper bound exists."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.int32)
        tab = np.asarray(_kernels.corner_table(self._rank_up_bits, self.linear_extension))
        tab.setflags(write=False)
        return tab

    @cached_property
    def meet_table(self):
        """Infimum table, -1 where no unique greatest lower bound exists."""
        if self.n == 0:
            return np.zeros((0, 0), dtype=np.int32)
        rev = self.linear_extension[::-1].copy()
        tab = np.asarray(_kernels.corner_table(self._rank_down_bits, rev))
        tab.setflags(write=False)
        return tab

    def join(self, a, b):
        c = int(self.join_table[a, b])
        return None if c < 0 else c

    def meet(self, a, b):
        c = int(self.meet_table[a, b])
        return None if c < 0 else c

    def upper_bounds(self, a, b):
        return [int(x) for x in np.nonzero(self.leq[a] & self.leq[b])[0]]

    def lower_bounds(self, a, b):
        return [int(x) for x in np.nonzero(self.leq[:, a] & self.leq[:, b])[0]]

    def minimal_of(self, elements):
        """Minimal elements of a subset, in index order."""
        elements = list(elements)
        return [x for x in elements if not any(y != x and self.leq[y, x] for y in elements)]

    def maximal_of(self, elements):
        elements = list(elements)
        return [x for x in elements if not any(y != x and self.leq[x, y] for y in elements)]

    def restrict(self, elements):
        """Induced subposet on ``elements`` (relabelled 0..k-1 in the given order)."""
        elements = np.asarray(list(elements), dtype=np.int64)
        labels = None
        if self.labels is not None:
            labels = [self.labels[x] for x in elements]
        return Poset(self.leq[np.ix_(elements, elements)], labels, check=False)


def _check_order(leq):
    n = leq.shape[0]
    if n == 0:
        return
    if not leq.diagonal().all():
        raise ValueError("order matrix is not reflexive")
    both = leq & leq.T & ~np.eye(n, dtype=bool)
    if both.any():
        a, b = np.argwhere(both)[0]
        raise CycleError([int(a), int(b)])
    m = leq.astype(np.int32)
    if ((m @ m > 0) & ~leq).any():
        raise ValueError("order matrix is not transitive")


def _topological(n, succ):
    """Kahn's algorithm; returns an order or raises CycleError with a witness."""
    indeg = [0] * n
    for a in range(n):
        for b in succ[a]:
            indeg[b] += 1
    ready = [a for a in range(n) if indeg[a] == 0]
    ready.reverse()
    order = []
    while ready:
        a = ready.pop()
        order.append(a)
        for b in sorted(succ[a], reverse=True):
            indeg[b] -= 1
            if indeg[b] == 0:
                ready.append(b)
    if len(order) == n:
        return order
    # walk forward inside the leftover part until a vertex repeats
    left = {a for a in range(n) if indeg[a] > 0}
    start = min(left)
    path, seen = [start], {start: 0}
    while True:
        nxt = min(b for b in succ[path[-1]] if b in left)
        if nxt in seen:
            raise CycleError(path[seen[nxt]:])
        seen[nxt] = len(path)
        path.append(nxt)


def poset_from_relations(n, pairs, labels=None):
    """Reflexive-transitive closure of ``pairs`` (each ``(a, b)`` meaning a <= b)."""
    succ = [set() for _ in range(n)]
    for a, b in pairs:
        a, b = int(a), int(b)
        if not (0 <= a < n and 0 <= b < n):
            raise IndexError(f"relation ({a}, {b}) outside 0..{n - 1}")
        if a != b:
            succ[a].add(b)
    order = _topological(n, succ)
    leq = np.eye(n, dtype=bool)
    for a in reversed(order):
        for b in succ[a]:
            leq[a] |= leq[b]
    return Poset(leq, labels, check=False)


@dataclass(frozen=True, eq=False)
class Lattice:
    poset: Poset
    join: np.ndarray
    meet: np.ndarray
    top: int
    bottom: int

    @property
    def n(self):
        return self.poset.n

    @property
    def leq(self):
        return self.poset.leq

    def __len__(self):
        return self.poset.n

    def label(self, x):
        return self.poset.label(x)


@dataclass(frozen=True)
class LatticeWitness:
    """Pair without a join (``kind='join'``) or meet, with its minimal upper
    (resp. maximal lower) bounds; an empty ``bounds`` means no bound at all."""

    pair: tuple
    kind: str
    bounds: tuple


def is_lattice(P):
    """Return a :class:`Lattice` if every pair has a join and a meet, else a :class:`LatticeWitness`."""
    if P.n == 0:
        raise EmptyPosetError("the empty poset is not a lattice")
    for kind, tab in (("join", P.join_table), ("meet", P.meet_table)):
        missing = np.argwhere(tab < 0)
        if missing.size:
            a, b = (int(v) for v in missing[0])
            if kind == "join":
                bounds = P.minimal_of(P.upper_bounds(a, b))
            else:
                bounds = P.maximal_of(P.lower_bounds(a, b))
            return LatticeWitness((a, b), kind, tuple(bounds))
    top = int(P.linear_extension[-1])
    bottom = int(P.linear_extension[0])
    return Lattice(P, P.join_table, P.meet_table, top, bottom)


def as_lattice(P):
    """Like :func:`is_lattice` but raises ``ValueError`` on a witness."""
    res = is_lattice(P)
    if isinstance(res, LatticeWitness):
        raise ValueError(f"not a lattice: {res}")
    return res


def join(P, a, b):
    return P.join(a, b)


def meet(P, a, b):
    return P.meet(a, b)


def is_distributive(L):
    """Check both distributive laws over all triples; returns ``(ok, witness_triple)``."""
    J = np.asarray(L.join)
    M = np.asarray(L.meet)
    for a in range(L.n):
        # a v (b ^ c) == (a v b) ^ (a v c)
        lhs = J[a][M]
        rhs = M[np.ix_(J[a], J[a])]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            return False, (a, int(bad[0][0]), int(bad[0][1]))
        lhs = M[a][J]
        rhs = J[np.ix_(M[a], M[a])]
        bad = np.argwhere(lhs != rhs)
        if bad.size:
            return False, (a, int(bad[0][0]), int(bad[0][1]))
    return True, None


def dual(P):
    """Order-reversed copy; elements keep their indices."""
    return Poset(P.leq.T, P.labels, check=False)


def maximal_elements(P):
    strict = P.leq & ~np.eye(P.n, dtype=bool)
    return [int(x) for x in np.nonzero(~strict.any(axis=1))[0]]


def minimal_elements(P):
    strict = P.leq & ~np.eye(P.n, dtype=bool)
    return [int(x) for x in np.nonzero(~strict.any(axis=0))[0]]


def covers_up(P, x):
    return P.upper_covers(x)


def covers_down(P, x):
    return P.lower_covers(x)


def is_order_embedding(P, Q, mapping):
    """True iff ``mapping`` is order-preserving and order-reflecting from P to Q."""
    mapping = np.asarray(mapping, dtype=np.int64)
    return bool(np.array_equal(P.leq, Q.leq[np.ix_(mapping, mapping)]))


def is_isomorphism(P, Q, mapping):
    return P.n == Q.n and len(set(int(m) for m in mapping)) == P.n and is_order_embedding(P, Q, mapping)


# ------------------------------------------------------------ completion


@dataclass(frozen=True)
class Cut:
    lower: frozenset
    upper: frozenset


def _masks(rows):
    return [sum(1 << int(j) for j in np.nonzero(r)[0]) for r in rows]


def dedekind_macneille(P):
    """Lattice of cuts of P and the embedding ``x -> cut(down(x))``.

    Cuts are stored by lower set; element ``i`` of the returned lattice is
    ``cuts[i]``.  Returns ``(lattice, embedding, cuts)``.
    """
    if P.n == 0:
        raise EmptyPosetError("completion of the empty poset is not supported")
    n = P.n
    full = (1 << n) - 1
    down = _masks(P.leq.T)
    up = _masks(P.leq)
    closed = {full}
    for d in down:
        closed |= {c & d for c in closed}
    lowers = sorted(closed, key=lambda m: (bin(m).count("1"), m))
    index = {m: i for i, m in enumerate(lowers)}
    k = len(lowers)
    arr = np.array(lowers, dtype=object)
    leq = np.array([[(arr[i] & ~arr[j]) == 0 for j in range(k)] for i in range(k)], dtype=bool)
    labels = None
    if P.labels is not None:
        labels = []
        for m in lowers:
            tops = P.maximal_of(i for i in range(n) if m >> i & 1)
            labels.append("{" + ",".join(P.labels[t] for t in tops) + "}")
    C = Poset(leq, labels, check=False)
    L = is_lattice(C)
    if isinstance(L, LatticeWitness):
        raise InvariantViolation(f"cut poset is not a lattice: {L}")
    embedding = tuple(index[d] for d in down)
    cuts = []
    for m in lowers:
        u = full
        for i in range(n):
            if m >> i & 1:
                u &= up[i]
        cuts.append(Cut(frozenset(i for i in range(n) if m >> i & 1), frozenset(i for i in range(n) if u >> i & 1)))
    return L, embedding, cuts


MAX_SUBSET_GROUND = 12


@lru_cache(maxsize=None)
def subset_lattice(n):
    """Power-set lattice of {1..n}: element ``i`` is the set with bitmask ``i``."""
    if not 0 <= n <= MAX_SUBSET_GROUND:
        raise SizeLimitError(f"subset lattice ground size must be in 0..{MAX_SUBSET_GROUND}")
    size = 1 << n
    e = np.arange(size)
    leq = (e[:, None] & ~e[None, :]) == 0
    labels = [mask_label(m) for m in range(size)]
    P = Poset(leq, labels, check=False)
    J = (e[:, None] | e[None, :]).astype(np.int32)
    M = (e[:, None] & e[None, :]).astype(np.int32)
    J.setflags(write=False)
    M.setflags(write=False)
    return Lattice(P, J, M, size - 1, 0)


def mask_label(mask):
    """``{1,3}``-style label for a bitmask over the 1-based ground set."""
    items = [str(i + 1) for i in range(mask.bit_length()) if mask >> i & 1]
    return "{" + ",".join(items) + "}"
