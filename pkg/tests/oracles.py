"""Independent brute-force reference implementations.

Nothing here calls into the package's tables or kernels; everything works on
plain Python sets, tuples and integers so the suite can compare the two.
"""
import itertools

import numpy as np


def closure(n, pairs):
    """Reflexive-transitive closure by Warshall; returns a set of (a, b)."""
    rel = [[a == b for b in range(n)] for a in range(n)]
    for a, b in pairs:
        rel[a][b] = True
    for k in range(n):
        for i in range(n):
            if rel[i][k]:
                for j in range(n):
                    if rel[k][j]:
                        rel[i][j] = True
    return {(a, b) for a in range(n) for b in range(n) if rel[a][b]}


def is_partial_order(n, rel):
    for a in range(n):
        if (a, a) not in rel:
            return False
    for a, b in rel:
        if a != b and (b, a) in rel:
            return False
        for c in range(n):
            if (b, c) in rel and (a, c) not in rel:
                return False
    return True


def cover_pairs(n, rel):
    return {
        (a, b)
        for a, b in rel
        if a != b and not any(c not in (a, b) and (a, c) in rel and (c, b) in rel for c in range(n))
    }


def rel_of(leq):
    leq = np.asarray(leq)
    return {(int(a), int(b)) for a, b in zip(*np.nonzero(leq))}


def sup(rel, elements, a, b):
    """Least common upper bound of a and b within ``elements``, or None."""
    ub = [c for c in elements if (a, c) in rel and (b, c) in rel]
    least = [c for c in ub if all((c, d) in rel for d in ub)]
    return least[0] if least else None


def inf(rel, elements, a, b):
    lb = [c for c in elements if (c, a) in rel and (c, b) in rel]
    greatest = [c for c in lb if all((d, c) in rel for d in lb)]
    return greatest[0] if greatest else None


def is_lattice(n, rel):
    els = range(n)
    return n > 0 and all(
        sup(rel, els, a, b) is not None and inf(rel, els, a, b) is not None
        for a in els
        for b in els
    )


def woven_in(n, rel, members):
    """Every pair of members has its lattice join or meet among the members."""
    members = sorted(members)
    inside = set(members)
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if sup(rel, range(n), a, b) not in inside and inf(rel, range(n), a, b) not in inside:
                return False
    return True


def woven_poset(rel, members):
    """Every pair has a supremum or infimum inside the subposet ``members``."""
    members = sorted(members)
    for i, a in enumerate(members):
        for b in members[i + 1 :]:
            if sup(rel, members, a, b) is None and inf(rel, members, a, b) is None:
                return False
    return True


def woven_family(sets):
    fam = set(sets)
    return all((x | y) in fam or (x & y) in fam for x in fam for y in fam)


def unravellable_families(woven):
    """``reach[m]``: mask ``m`` can be emptied one member at a time through woven masks."""
    size = len(woven)
    nbits = size.bit_length() - 1
    reach = [False] * size
    for m in sorted(range(size), key=lambda m: bin(m).count("1")):
        if not woven[m]:
            continue
        reach[m] = m == 0 or any(m >> i & 1 and reach[m ^ (1 << i)] for i in range(nbits))
    return reach


def rho(n, rel):
    """Tie-breaker with 1-based powers of three over down-sets."""
    return [3 ** (n + 1) - sum(3 ** (i + 1) for i in range(n) if (i, q) in rel) for q in range(n)]


def submodular(n, rel, values):
    for a in range(n):
        for b in range(n):
            j, m = sup(rel, range(n), a, b), inf(rel, range(n), a, b)
            if values[a] + values[b] < values[j] + values[m]:
                return False
    return True


def labeled_posets_bruteforce(n):
    """All partial orders on n labeled points, by filtering every strict relation matrix.

    Returns a set of n*n byte strings (row-major reflexive order matrices).
    """
    off = [(i, j) for i in range(n) for j in range(n) if i != j]
    m = len(off)
    codes = np.arange(1 << m, dtype=np.int64)
    R = np.zeros((1 << m, n, n), dtype=bool)
    for bit, (i, j) in enumerate(off):
        R[:, i, j] = (codes >> bit) & 1
    ok = np.ones(1 << m, dtype=bool)
    for i, j in off:
        ok &= ~(R[:, i, j] & R[:, j, i])
    for i, j, k in itertools.product(range(n), repeat=3):
        if len({i, j, k}) == 3:
            ok &= ~(R[:, i, j] & R[:, j, k] & ~R[:, i, k])
    R = R[ok]
    R[:, np.arange(n), np.arange(n)] = True
    return {r.tobytes() for r in R}


def isomorphic(leq_a, leq_b):
    """Order isomorphism by trying every bijection (small n only)."""
    A, B = np.asarray(leq_a, bool), np.asarray(leq_b, bool)
    if A.shape != B.shape:
        return False
    n = A.shape[0]
    if sorted(A.sum(0)) != sorted(B.sum(0)) or sorted(A.sum(1)) != sorted(B.sum(1)):
        return False
    for perm in itertools.permutations(range(n)):
        p = list(perm)
        if np.array_equal(A, B[np.ix_(p, p)]):
            return True
    return False


def cuts(n, rel):
    """Dedekind-MacNeille cuts by brute force: subsets A with lb(ub(A)) = A."""
    found = []
    for mask in range(1 << n):
        A = {i for i in range(n) if mask >> i & 1}
        U = {u for u in range(n) if all((a, u) in rel for a in A)}
        LB = {x for x in range(n) if all((x, u) in rel for u in U)}
        if LB == A:
            found.append(frozenset(A))
    return found


def involutions(n):
    """All involutions of range(n) as tuples."""
    def build(rest, acc):
        if not rest:
            yield dict(acc)
            return
        a = rest[0]
        yield from build(rest[1:], acc + [(a, a)])
        for i in range(1, len(rest)):
            b = rest[i]
            yield from build(rest[1:i] + rest[i + 1 :], acc + [(a, b), (b, a)])

    for m in build(list(range(n)), []):
        yield tuple(m[i] for i in range(n))


def order_reversing(rel, inv):
    return all((inv[b], inv[a]) in rel for a, b in rel)
