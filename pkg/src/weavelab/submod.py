"""Exact submodular value tables, the tie-breaker and order-induced unravelling.

No floating point: values are ``int`` or ``fractions.Fraction``.
"""
from dataclasses import dataclass
from fractions import Fraction
from numbers import Rational

import numpy as np

from .order import InvariantViolation
from .weave import StepCertificate, UnravelTrace, is_woven_in


class NotSubmodularError(ValueError):
    def __init__(self, witness):
        self.witness = witness
        super().__init__(f"function is not submodular; witness pair {witness}")


class EmptyInputError(ValueError):
    pass


def as_rational(value):
    """Parse ``int``, ``Fraction`` or ``"p/q"`` text; floats are rejected."""
    if isinstance(value, bool):
        raise TypeError("booleans are not values")
    if isinstance(value, int):
        return value
    if isinstance(value, Rational):
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if any(ch in text.lower() for ch in ".e"):
            raise ValueError(f"not an exact rational: {value!r}")
        q = Fraction(text)
        return q.numerator if q.denominator == 1 else q
    raise TypeError(f"exact rational required, got {type(value).__name__}")


@dataclass(frozen=True, eq=False)
class ValueTable:
    lattice: object
    values: tuple

    def __post_init__(self):
        vals = tuple(as_rational(v) for v in self.values)
        if len(vals) != self.lattice.n:
            raise ValueError(f"expected {self.lattice.n} values, got {len(vals)}")
        object.__setattr__(self, "values", vals)

    def __getitem__(self, x):
        return self.values[x]

    def __len__(self):
        return len(self.values)

    def array(self):
        return np.array(self.values, dtype=object)


def is_submodular(L, f):
    """``f(p) + f(q) >= f(p v q) + f(p ^ q)`` on all pairs; returns ``(ok, witness)``."""
    F = f.array()
    J, M = np.asarray(L.join), np.asarray(L.meet)
    lhs = F[:, None] + F[None, :]
    rhs = F[J] + F[M]
    bad = np.argwhere(np.triu(lhs < rhs, 1))
    if bad.size:
        return False, (int(bad[0][0]), int(bad[0][1]))
    return True, None


def induced_set(L, f, k, certify=True):
    """Strict sublevel set ``{p : f(p) < k}``; re-checked woven when f is submodular."""
    k = as_rational(k)
    P = [p for p in range(L.n) if f[p] < k]
    if certify and is_submodular(L, f)[0]:
        ok, wit = is_woven_in(L, P)
        if not ok:
            raise InvariantViolation(f"sublevel set of a submodular function is not woven: {wit}")
    return P


def tie_breaker_rho(L):
    """``rho(q) = 3**(n+1) - sum(3**i for p_i <= q)`` with 1-based index ``i``."""
    n = L.n
    top = 3 ** (n + 1)
    powers = [3 ** (i + 1) for i in range(n)]
    leq = np.asarray(L.leq)
    values = [top - sum(powers[i] for i in np.nonzero(leq[:, q])[0]) for q in range(n)]
    return ValueTable(L, values)


def tie_break_constants(f, rho):
    """``(eps, c)``: smallest gap between distinct values of f (1 if f is
    constant) and the scale ``c = eps / (1 + max rho)``."""
    distinct = sorted(set(f.values))
    if len(distinct) < 2:
        eps = Fraction(1)
    else:
        eps = Fraction(min(b - a for a, b in zip(distinct, distinct[1:])))
    c = eps / (1 + max(rho.values))
    return eps, c


def perturb(L, f, rho):
    """``g = f + c * rho``: injective, submodular, and order-compatible with f."""
    ok, wit = is_submodular(L, f)
    if not ok:
        raise NotSubmodularError(wit)
    _, c = tie_break_constants(f, rho)
    return ValueTable(L, [f[p] + c * rho[p] for p in range(L.n)])


def unravel_order_induced(L, f, k):
    """Unravel ``{f < k}`` by deleting in decreasing order of the perturbed function."""
    ok, wit = is_submodular(L, f)
    if not ok:
        raise NotSubmodularError(wit)
    P = induced_set(L, f, k, certify=False)
    g = perturb(L, f, tie_breaker_rho(L))
    trace = UnravelTrace(tuple(P))
    rest = set(P)
    for p in sorted(P, key=lambda x: g[x], reverse=True):
        rest.discard(p)
        ok, wit = is_woven_in(L, sorted(rest))
        trace.removals.append(p)
        trace.certificates.append(StepCertificate(p, ok, wit))
        if not ok:
            trace.status = "stuck"
            break
    return trace


def delete_max_step(L, P, f):
    """Remove the lowest-index maximiser of f from P; the remainder is re-checked woven."""
    P = sorted(P)
    if not P:
        raise EmptyInputError("nothing to delete")
    best = max(f[p] for p in P)
    p = next(x for x in P if f[x] == best)
    rest = [x for x in P if x != p]
    ok, wit = is_woven_in(L, rest)
    if not ok:
        raise InvariantViolation(f"removing maximiser {p} broke wovenness at {wit}")
    return rest


# ------------------------------------------------------------- generators


def _ground_size(L):
    n = L.n.bit_length() - 1
    e = np.arange(L.n)
    if L.n != 1 << n or not np.array_equal(L.join, e[:, None] | e[None, :]):
        raise ValueError("a subset lattice is required")
    return n


def cut_function(L, edges):
    """Number of edges with exactly one end in X (vertices are 0-based ground indices)."""
    _ground_size(L)
    return ValueTable(L, [sum(1 for u, v in edges if (X >> u & 1) != (X >> v & 1)) for X in range(L.n)])


def partition_matroid_rank(L, blocks, capacities):
    """``rank(X) = sum_b min(|X & block_b|, cap_b)``; blocks are bitmasks."""
    _ground_size(L)
    return ValueTable(
        L, [sum(min(bin(X & b).count("1"), c) for b, c in zip(blocks, capacities)) for X in range(L.n)]
    )


def coverage_function(L, covers):
    """``|union of covers[i] for i in X|`` with ``covers[i]`` a bitmask of covered items."""
    n = _ground_size(L)
    vals = []
    for X in range(L.n):
        u = 0
        for i in range(n):
            if X >> i & 1:
                u |= covers[i]
        vals.append(bin(u).count("1"))
    return ValueTable(L, vals)


def random_submodular(L, kind, seed):
    """Seeded cut, partition-matroid rank or coverage function on a subset lattice."""
    n = _ground_size(L)
    rng = np.random.default_rng(seed)
    if kind == "cut":
        p = rng.uniform(0.2, 0.8)
        edges = [(u, v) for u in range(n) for v in range(u + 1, n) if rng.random() < p]
        f = cut_function(L, edges)
    elif kind in ("matroid-rank", "matroid"):
        nblocks = int(rng.integers(1, n + 1)) if n else 1
        owner = rng.integers(0, nblocks, size=n)
        blocks = [sum(1 << i for i in range(n) if owner[i] == b) for b in range(nblocks)]
        caps = [int(rng.integers(0, bin(b).count("1") + 1)) for b in blocks]
        f = partition_matroid_rank(L, blocks, caps)
    elif kind == "coverage":
        items = int(rng.integers(1, 2 * n + 2))
        covers = [int(sum(1 << j for j in range(items) if rng.random() < 0.4)) for _ in range(n)]
        f = coverage_function(L, covers)
    else:
        raise ValueError(f"unknown kind {kind!r}")
    ok, wit = is_submodular(L, f)
    if not ok:
        raise InvariantViolation(f"generated {kind} function is not submodular at {wit}")
    return f
