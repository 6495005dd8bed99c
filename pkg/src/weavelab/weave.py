"""Wovenness checks, removal/addition steps and unravelling engines."""
import os
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .order import InvariantViolation, Poset, maximal_elements, subset_lattice


class NotWovenError(ValueError):
    def __init__(self, witness, message="input is not woven"):
        self.witness = witness
        super().__init__(f"{message}; witness pair {witness}")


class FullError(ValueError):
    """No element left to add."""


class EnumerationCapError(ValueError):
    pass


DEFAULT_ENUM_CAP = 16
MAX_POSET_ENUM = 6


def enum_cap():
    """Lattice-size cap for subset enumeration (``WEAVELAB_ENUM_CAP`` overrides)."""
    return int(os.environ.get("WEAVELAB_ENUM_CAP", DEFAULT_ENUM_CAP))


def member_mask(n, members):
    mask = np.zeros(n, dtype=bool)
    mask[list(members)] = True
    return mask


# ------------------------------------------------------------------ predicates


def is_woven_in(L, P):
    """``(True, None)`` if every pair of ``P`` has its join or meet in ``P``,
    otherwise ``(False, (p, q))`` with both corners of ``p, q`` outside ``P``."""
    members = member_mask(L.n, P)
    i, j = _kernels.woven_witness(L.join, L.meet, members)
    if i < 0:
        return True, None
    return False, (i, j)


def is_woven_poset(P):
    """Intrinsic wovenness: every pair has a supremum or an infimum inside P."""
    if P.n < 2:
        return True, None
    bad = (P.join_table < 0) & (P.meet_table < 0)
    hits = np.argwhere(np.triu(bad, 1))
    if hits.size == 0:
        return True, None
    return False, (int(hits[0][0]), int(hits[0][1]))


@dataclass(frozen=True)
class SetFamily:
    """Distinct subsets of the ground set {1..ground}, stored as bitmasks."""

    ground: int
    sets: tuple

    def __post_init__(self):
        sets = tuple(int(s) for s in self.sets)
        if any(s < 0 or s >> self.ground for s in sets):
            raise ValueError("set does not fit the ground set")
        if len(set(sets)) != len(sets):
            raise ValueError("duplicate sets in family")
        object.__setattr__(self, "sets", sets)

    @classmethod
    def from_sets(cls, ground, sets):
        masks = []
        for s in sets:
            m = 0
            for e in s:
                if not 1 <= e <= ground:
                    raise ValueError(f"element {e} outside 1..{ground}")
                m |= 1 << (e - 1)
            masks.append(m)
        return cls(ground, tuple(masks))

    def __len__(self):
        return len(self.sets)


def _woven_masks(sets):
    present = set(sets)
    for i, x in enumerate(sets):
        for y in sets[i + 1 :]:
            if (x | y) not in present and (x & y) not in present:
                return False, (x, y)
    return True, None


FAMILY_LATTICE_CAP = 8


def is_woven_family(F):
    """Wovenness of a set family; witness is a pair of bitmasks."""
    if F.ground > FAMILY_LATTICE_CAP:
        return _woven_masks(F.sets)
    return is_woven_in(subset_lattice(F.ground), F.sets)


# ------------------------------------------------------------- removal steps


def removal_witnesses(L, P):
    """Map each ``p`` in P that cannot be removed to a pair ``(q, r)`` of
    ``P - p`` whose join and meet both lie outside ``P - p``.

    Assumes P is woven in L: a blocked removal then has exactly one corner
    in P, namely ``p``, with ``p`` different from ``q`` and ``r``.
    """
    idx = np.array(sorted(P), dtype=np.int64)
    if idx.size < 3:
        return {}
    ext = np.append(member_mask(L.n, idx), False)
    J = np.asarray(L.join)[np.ix_(idx, idx)]
    M = np.asarray(L.meet)[np.ix_(idx, idx)]
    inJ, inM = ext[J], ext[M]
    corner = np.where(inJ, J, M)
    hit = (inJ ^ inM) & (corner != idx[:, None]) & (corner != idx[None, :])
    hit &= np.triu(np.ones_like(hit), 1)
    qs, rs = np.nonzero(hit)
    if qs.size == 0:
        return {}
    cs = corner[qs, rs]
    _, first = np.unique(cs, return_index=True)
    return {int(cs[k]): (int(idx[qs[k]]), int(idx[rs[k]])) for k in first}


def removable_elements(L, P):
    """All ``p`` in P with ``P - p`` woven in L, each re-checked directly."""
    P = sorted(P)
    ok, wit = is_woven_in(L, P)
    if not ok:
        raise NotWovenError(wit)
    blocked = removal_witnesses(L, P)
    out = []
    for p in P:
        if p in blocked:
            continue
        rest = [x for x in P if x != p]
        if not is_woven_in(L, rest)[0]:
            raise InvariantViolation(f"removal of {p} was not blocked but fails re-check")
        out.append(p)
    return out


def ravel_step(L, P):
    """Lowest-index maximal element of the complement; adding it keeps P woven."""
    inside = member_mask(L.n, P)
    if inside.all():
        raise FullError("P already equals L")
    outside = ~inside
    strict = np.asarray(L.leq) & ~np.eye(L.n, dtype=bool)
    above = (strict & outside[None, :]).any(axis=1)
    cands = np.nonzero(outside & ~above)[0]
    p = int(cands[0])
    ok, wit = is_woven_in(L, sorted(set(P) | {p}))
    if not ok:
        raise InvariantViolation(f"adding {p} broke wovenness at {wit}")
    return p


# ------------------------------------------------------------------- traces


@dataclass
class StepCertificate:
    removed: int
    woven: bool
    witness: tuple = None


@dataclass
class UnravelTrace:
    start: tuple
    removals: list = field(default_factory=list)
    certificates: list = field(default_factory=list)
    status: str = "ok"  # ok | stuck | exhausted

    @property
    def ok(self):
        return self.status == "ok"

    def lines(self, label=str):
        out = []
        for i, cert in enumerate(self.certificates, 1):
            flag = "true" if cert.woven else "false"
            out.append(f"step {i} remove {label(cert.removed)} woven={flag}")
        out.append("result ok" if self.ok else "result stuck")
        return out


def _certified_trace(L, start, order):
    trace = UnravelTrace(tuple(sorted(start)))
    rest = set(start)
    for p in order:
        rest.discard(p)
        ok, wit = is_woven_in(L, sorted(rest))
        trace.removals.append(p)
        trace.certificates.append(StepCertificate(p, ok, wit))
        if not ok:
            trace.status = "stuck"
            break
    return trace


def unravel_search(L, P, strategy="greedy"):
    """Unravel P inside L by greedy lowest-index removal or exhaustive backtracking.

    Backtracking memoizes dead member sets and returns a trace with status
    ``exhausted`` when no unravelling exists.
    """
    P = sorted(P)
    ok, wit = is_woven_in(L, P)
    if not ok:
        raise NotWovenError(wit)
    if strategy == "greedy":
        trace = UnravelTrace(tuple(P))
        rest = list(P)
        while rest:
            cands = removable_elements(L, rest)
            if not cands:
                trace.status = "stuck"
                break
            p = cands[0]
            rest.remove(p)
            trace.removals.append(p)
            trace.certificates.append(StepCertificate(p, *is_woven_in(L, rest)))
        return trace
    if strategy not in ("backtracking", "backtrack"):
        raise ValueError(f"unknown strategy {strategy!r}")

    dead = set()
    path = []

    def search(rest):
        if not rest:
            return True
        key = frozenset(rest)
        if key in dead:
            return False
        for p in removable_elements(L, rest):
            path.append(p)
            if search([x for x in rest if x != p]):
                return True
            path.pop()
        dead.add(key)
        return False

    if search(P):
        return _certified_trace(L, P, path)
    return UnravelTrace(tuple(P), status="exhausted")


# -------------------------------------------------------------- woven posets


def find_unique_cover_element(P):
    """First element (index order) with exactly one lower cover, else exactly
    one upper cover; lower is tested before upper for each element."""
    ok, wit = is_woven_poset(P)
    if not ok:
        raise NotWovenError(wit)
    if P.n < 2:
        raise ValueError("need at least two elements")
    cov = P.cover_matrix
    lower = cov.sum(axis=0)
    upper = cov.sum(axis=1)
    for x in range(P.n):
        if lower[x] == 1:
            return x, "lower"
        if upper[x] == 1:
            return x, "upper"
    raise InvariantViolation("woven poset without a unique-cover element")


def unravel_poset(P):
    """Unravel a woven poset by repeatedly deleting a unique-cover element.

    Removals are reported as indices of the input poset; every intermediate
    subposet is re-certified intrinsically woven.
    """
    ok, wit = is_woven_poset(P)
    if not ok:
        raise NotWovenError(wit)
    trace = UnravelTrace(tuple(range(P.n)))
    rest = list(range(P.n))
    while rest:
        if len(rest) == 1:
            x = rest[0]
        else:
            local, _ = find_unique_cover_element(P.restrict(rest))
            x = rest[local]
        rest.remove(x)
        ok, wit = is_woven_poset(P.restrict(rest))
        if not ok:
            raise InvariantViolation(f"removing {x} left a non-woven poset, witness {wit}")
        trace.removals.append(x)
        trace.certificates.append(StepCertificate(x, True, None))
    return trace


def d_classes(P):
    """Group elements by the set of maximal elements above them."""
    M = maximal_elements(P)
    classes = {}
    for x in range(P.n):
        key = frozenset(m for m in M if P.leq[x, m])
        classes.setdefault(key, []).append(x)
    return {k: tuple(v) for k, v in classes.items()}


def infimum_of(P, elements):
    """Greatest common lower bound of ``elements`` inside P, or None."""
    common = np.ones(P.n, dtype=bool)
    for m in elements:
        common &= P.leq[:, m]
    lows = np.nonzero(common)[0]
    for c in lows:
        if P.leq[lows, c].all():
            return int(c)
    return None


def min_class_witness(P, proper=False):
    """Element whose only upper cover is ``inf M'`` for an inclusion-minimal
    realized class ``M'`` with at least two members; None if every class is a
    singleton.  ``proper=True`` skips the class of all maximal elements."""
    ok, wit = is_woven_poset(P)
    if not ok:
        raise NotWovenError(wit)
    classes = d_classes(P)
    M = frozenset(maximal_elements(P))
    big = [k for k, v in classes.items() if len(v) >= 2 and not (proper and k == M)]
    if not big:
        return None
    key = min(big, key=lambda k: (len(k), sorted(k)))
    inf = infimum_of(P, key)
    if inf is None:
        raise InvariantViolation(f"class {sorted(key)} has no infimum")
    pool = [x for x in classes[key] if x != inf]
    x = P.maximal_of(pool)[0]
    if P.upper_covers(x) != [inf]:
        raise InvariantViolation(f"{x} has upper covers {P.upper_covers(x)}, expected only {inf}")
    return x


# ---------------------------------------------------------------- enumeration


def woven_table(L):
    """Boolean wovenness flag for every subset mask of L (bit i = element i)."""
    if L.n > enum_cap():
        raise EnumerationCapError(f"|L| = {L.n} exceeds enumeration cap {enum_cap()}")
    return np.asarray(_kernels.woven_mask_table(np.asarray(L.join), np.asarray(L.meet)))


def enumerate_woven_subsets(L):
    """Yield every woven subset of L as a sorted tuple, in bitmask order."""
    table = woven_table(L)
    for mask in np.nonzero(table)[0]:
        mask = int(mask)
        yield tuple(i for i in range(L.n) if mask >> i & 1)


def _extensions(n_prev, ups):
    """All (down, up) mask pairs that extend a poset given by up-set masks."""
    downs_of = [0] * n_prev
    for a in range(n_prev):
        for b in range(n_prev):
            if ups[a] >> b & 1:
                downs_of[b] |= 1 << a
    down_closed, up_closed = [], []
    for s in range(1 << n_prev):
        dc = uc = True
        for a in range(n_prev):
            if s >> a & 1:
                if downs_of[a] & ~s:
                    dc = False
                if ups[a] & ~s:
                    uc = False
        if dc:
            down_closed.append(s)
        if uc:
            up_closed.append(s)
    full = (1 << n_prev) - 1
    for D in down_closed:
        common = full
        for a in range(n_prev):
            if D >> a & 1:
                common &= ups[a]
        for U in up_closed:
            if U & D or U & ~common:
                continue
            yield D, U


def _poset_masks(n):
    if n == 0:
        yield ()
        return
    for ups in _poset_masks(n - 1):
        for D, U in _extensions(n - 1, ups):
            new = 1 << (n - 1)
            grown = tuple(u | new if D >> a & 1 else u for a, u in enumerate(ups))
            yield grown + (U | new,)


def enumerate_posets(n):
    """Yield every labeled poset on ``n`` elements exactly once."""
    if not 0 <= n <= MAX_POSET_ENUM:
        raise EnumerationCapError(f"poset enumeration supports n <= {MAX_POSET_ENUM}")
    for ups in _poset_masks(n):
        leq = np.array([[u >> b & 1 for b in range(n)] for u in ups], dtype=bool).reshape(n, n)
        yield Poset(leq, check=False)


# ------------------------------------------------------------ family sweeps


@dataclass
class FamilySweep:
    ground: int
    woven: np.ndarray
    unravellable: np.ndarray
    records: list

    @property
    def woven_count(self):
        return int(self.woven.sum())

    def removable(self, mask):
        n = 1 << self.ground
        return [i for i in range(n) if mask >> i & 1 and self.woven[mask ^ (1 << i)]]

    def trace(self, mask):
        """Lowest-index unravelling of ``mask`` following the reachability table."""
        order = []
        while mask:
            i = next(i for i in self.removable(mask) if self.unravellable[mask ^ (1 << i)])
            order.append(i)
            mask ^= 1 << i
        return order


def family_sweep(ground):
    """Classify every family over {1..ground}: wovenness, removability and
    existence of a full unravelling.  Families that are woven but have no
    removable member or no unravelling are returned as ``records``."""
    L = subset_lattice(ground)
    woven = woven_table(L)
    reach = np.asarray(_kernels.unravel_table(woven))
    sweep = FamilySweep(ground, woven, reach, [])
    bad = np.nonzero(woven & ~reach)[0]
    for mask in bad:
        mask = int(mask)
        sweep.records.append({"family": mask, "removable": sweep.removable(mask)})
    return sweep
