"""Woven-but-irreducible subset of a lattice built from a 4-regular graph.

Pipeline: graph -> bipartite double cover -> red/blue 2-factor split ->
stratified poset ``b < V- < V < W < W+ < t`` -> certification.  Every
claim in the final report is established computationally and every
witness is re-validated straight from the order matrix.
"""
import logging
import warnings
from dataclasses import dataclass, field

import networkx as nx
import numpy as np

from . import _kernels
from .order import LatticeWitness, Poset, is_lattice, poset_from_relations
from .weave import member_mask, removal_witnesses

log = logging.getLogger(__name__)


class ParseError(ValueError):
    pass


class MultiEdgeError(ParseError):
    pass


class LoopError(ParseError):
    pass


class NotFourRegularError(ValueError):
    pass


class NotBipartiteError(ValueError):
    pass


class MatchingFailure(RuntimeError):
    pass


class InfeasibleError(ValueError):
    pass


class GirthWarning(UserWarning):
    pass


@dataclass(frozen=True)
class Graph:
    """Simple undirected graph with sorted neighbour lists."""

    n: int
    adj: tuple

    @classmethod
    def from_edges(cls, n, edges):
        nbrs = [set() for _ in range(n)]
        for u, v in edges:
            u, v = int(u), int(v)
            if not (0 <= u < n and 0 <= v < n):
                raise ParseError(f"edge ({u}, {v}) outside 0..{n - 1}")
            if u == v:
                raise LoopError(f"loop at vertex {u}")
            if v in nbrs[u]:
                raise MultiEdgeError(f"repeated edge ({u}, {v})")
            nbrs[u].add(v)
            nbrs[v].add(u)
        return cls(n, tuple(tuple(sorted(s)) for s in nbrs))

    def edges(self):
        return [(u, v) for u in range(self.n) for v in self.adj[u] if u < v]

    def degree(self, v):
        return len(self.adj[v])

    def degrees(self):
        return [len(a) for a in self.adj]

    def is_regular(self, d):
        return all(len(a) == d for a in self.adj)

    def csr(self):
        indptr = np.zeros(self.n + 1, dtype=np.int64)
        indptr[1:] = np.cumsum([len(a) for a in self.adj])
        indices = np.array([v for a in self.adj for v in a], dtype=np.int64)
        return indptr, indices

    def to_networkx(self):
        g = nx.Graph()
        g.add_nodes_from(range(self.n))
        g.add_edges_from(self.edges())
        return g


def girth(G):
    """Length of a shortest cycle, or ``None`` for a forest."""
    if G.n == 0:
        return None
    indptr, indices = G.csr()
    g = int(_kernels.girth_csr(indptr, indices))
    return None if g < 0 else g


def bipartite_double(G):
    """Bipartite double cover: ``v_x ~ w_y`` iff ``xy`` is an edge of G.

    Vertex ``x`` of the result is the V-copy of ``x``, vertex ``n + x`` its
    W-copy; ``correspondence[i]`` is ``(side, vertex of G)``.
    """
    if not G.is_regular(4):
        raise NotFourRegularError(f"degrees {sorted(set(G.degrees()))}, expected 4")
    n = G.n
    edges = [(x, n + y) for x in range(n) for y in G.adj[x]]
    D = Graph.from_edges(2 * n, edges)
    corr = tuple([("V", x) for x in range(n)] + [("W", x) for x in range(n)])
    return D, corr


@dataclass(frozen=True)
class EdgeColoring:
    graph: Graph
    red: frozenset
    blue: frozenset

    def check(self):
        """Every vertex meets exactly two red and two blue edges."""
        r = [0] * self.graph.n
        b = [0] * self.graph.n
        for u, v in self.red:
            r[u] += 1
            r[v] += 1
        for u, v in self.blue:
            b[u] += 1
            b[v] += 1
        return all(x == 2 for x in r) and all(x == 2 for x in b)


def _sides(D):
    colour = [-1] * D.n
    for s in range(D.n):
        if colour[s] >= 0:
            continue
        colour[s] = 0
        stack = [s]
        while stack:
            u = stack.pop()
            for v in D.adj[u]:
                if colour[v] < 0:
                    colour[v] = 1 - colour[u]
                    stack.append(v)
                elif colour[v] == colour[u]:
                    raise NotBipartiteError(f"odd cycle through edge ({u}, {v})")
    return colour


def two_factor_split(D):
    """Red = two successively extracted perfect matchings, blue = the rest."""
    if not D.is_regular(4):
        raise NotFourRegularError(f"degrees {sorted(set(D.degrees()))}, expected 4")
    colour = _sides(D)
    left = [v for v in range(D.n) if colour[v] == 0]
    remaining = {tuple(sorted(e)) for e in D.edges()}
    red = set()
    for _ in range(2):
        g = nx.Graph()
        g.add_nodes_from(range(D.n))
        g.add_edges_from(remaining)
        match = nx.bipartite.hopcroft_karp_matching(g, top_nodes=left)
        picked = {tuple(sorted((u, match[u]))) for u in left if u in match}
        if len(picked) * 2 != D.n:
            raise MatchingFailure("regular bipartite graph without a perfect matching")
        red |= picked
        remaining -= picked
    coloring = EdgeColoring(D, frozenset(red), frozenset(remaining))
    if not coloring.check():
        raise MatchingFailure("colouring violates the two-red/two-blue condition")
    return coloring


STRATA = ("b", "V-", "V", "W", "W+", "t")


@dataclass(frozen=True, eq=False)
class StratifiedLattice:
    """Stratified poset on ``4n + 2`` elements and its lattice certificate.

    Layout: ``b = 0``, ``V- = 1..n``, ``V = n+1..2n``, ``W = 2n+1..3n``,
    ``W+ = 3n+1..4n``, ``t = 4n+1``; ``vertex[x]`` is the graph vertex an
    element copies (-1 for b and t).
    """

    graph: Graph
    coloring: EdgeColoring
    poset: Poset
    stratum: tuple
    vertex: tuple
    lattice: object  # Lattice or LatticeWitness

    @property
    def n(self):
        return self.poset.n

    def members(self):
        """``P = V u W u {t, b}``."""
        return [x for x in range(self.n) if self.stratum[x] in ("b", "V", "W", "t")]

    def element(self, stratum, v):
        k = self.graph.n
        base = {"V-": 1, "V": 1 + k, "W": 1 + 2 * k, "W+": 1 + 3 * k}[stratum]
        return base + v

    def label(self, x):
        return self.poset.label(x)


def build_lattice(G, coloring):
    """Assemble the stratified poset; lattice-ness is carried as data."""
    k = G.n
    b, t = 0, 4 * k + 1
    vm = lambda v: 1 + v  # noqa: E731
    vv = lambda v: 1 + k + v  # noqa: E731
    ww = lambda v: 1 + 2 * k + v  # noqa: E731
    wp = lambda v: 1 + 3 * k + v  # noqa: E731
    rel = []
    for u, w in coloring.red:
        x, y = (u, w - k) if u < k else (w, u - k)  # x in V, y in W
        rel.append((vm(y), vv(x)))
    for x, y in G.edges():
        rel.append((vv(x), ww(y)))
        rel.append((vv(y), ww(x)))
    for u, w in coloring.blue:
        x, y = (u, w - k) if u < k else (w, u - k)
        rel.append((ww(y), wp(x)))
    for e in range(1, t):
        rel.append((b, e))
        rel.append((e, t))
    stratum = ["b"] + ["V-"] * k + ["V"] * k + ["W"] * k + ["W+"] * k + ["t"]
    vertex = [-1] + list(range(k)) * 4 + [-1]
    labels = ["b"] + [f"{stratum[x]}:{vertex[x]}" for x in range(1, t)] + ["t"]
    P = poset_from_relations(4 * k + 2, rel, labels)
    return StratifiedLattice(G, coloring, P, tuple(stratum), tuple(vertex), is_lattice(P))


# ------------------------------------------------------------- verification


def direct_join(P, a, b):
    """Join straight from the order matrix (independent of the corner tables)."""
    ub = np.nonzero(P.leq[a] & P.leq[b])[0]
    mins = [int(c) for c in ub if P.leq[c, ub].all()]
    return mins[0] if mins else None


def direct_meet(P, a, b):
    lb = np.nonzero(P.leq[:, a] & P.leq[:, b])[0]
    maxs = [int(c) for c in lb if P.leq[lb, c].all()]
    return maxs[0] if maxs else None


@dataclass
class Certificate:
    name: str
    passed: bool
    witness: object = None
    verified: bool = True  # witness re-validated from the order matrix
    detail: str = ""


@dataclass
class Report:
    certificates: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    witnesses: dict = field(default_factory=dict)

    @property
    def ok(self):
        return all(c.passed for c in self.certificates)

    @property
    def consistent(self):
        """Every failed certificate carries a re-validated witness."""
        return all(c.passed or (c.witness is not None and c.verified) for c in self.certificates)

    def get(self, name):
        return next(c for c in self.certificates if c.name == name)

    def lines(self):
        out = list(self.notes)
        for c in self.certificates:
            status = "pass" if c.passed else "fail"
            line = f"certificate {c.name}: {status}"
            if c.detail:
                line += f" {c.detail}"
            out.append(line)
        return out


DIRECT_RECHECK_LIMIT = 300


def verify_counterexample(SL):
    """Certify lattice-ness, wovenness of P and non-removability of every p in P."""
    P = SL.poset
    lab = P.label
    members = SL.members()
    inside = member_mask(P.n, members)
    report = Report()

    lat = SL.lattice
    if isinstance(lat, LatticeWitness):
        a, c = lat.pair
        corner = direct_join(P, a, c) if lat.kind == "join" else direct_meet(P, a, c)
        bounds = ",".join(lab(x) for x in lat.bounds) or "none"
        report.certificates.append(
            Certificate(
                "lattice", False, lat, corner is None,
                f"no {lat.kind} of {lab(a)} {lab(c)}; extremal bounds {{{bounds}}}",
            )
        )
    else:
        report.certificates.append(Certificate("lattice", True, None, True, f"{P.n} elements"))

    i, j = _kernels.woven_witness(P.join_table, P.meet_table, inside)
    if i < 0:
        report.certificates.append(Certificate("woven", True, None, True, f"|P| = {len(members)}"))
        woven = True
    else:
        jn, mt = direct_join(P, i, j), direct_meet(P, i, j)
        good = not (jn is not None and inside[jn]) and not (mt is not None and inside[mt])
        report.certificates.append(
            Certificate("woven", False, (i, j), good, f"witness {lab(i)} {lab(j)} has no corner in P")
        )
        woven = False

    witnesses = removal_witnesses(_Tables(P), members) if woven else {}
    failures, checked = [], 0
    for p in members:
        w = witnesses.get(p)
        if w is None:
            failures.append(p)
            continue
        q, r = w
        jn, mt = direct_join(P, q, r), direct_meet(P, q, r)
        outside = [c is None or not inside[c] or c == p for c in (jn, mt)]
        if p in (q, r) or not all(outside):
            failures.append(p)
            continue
        checked += 1
    cert = Certificate("nonremovable", not failures and woven)
    cert.detail = f"{checked}/{len(members)} elements carry re-checked witnesses"
    if not woven:
        cert.witness = report.get("woven").witness
        cert.verified = report.get("woven").verified
        cert.detail += "; P itself is not woven"
    elif failures:
        p = failures[0]
        rest = [x for x in members if x != p]
        if len(rest) <= DIRECT_RECHECK_LIMIT:
            ok, _ = _woven_direct(P, rest)
        else:
            ok = _kernels.woven_witness(P.join_table, P.meet_table, member_mask(P.n, rest))[0] < 0
        cert.witness = p
        cert.verified = ok
        cert.detail += f"; {lab(p)} is removable"
    report.certificates.append(cert)
    report.witnesses = dict(witnesses)
    return report


class _Tables:
    """Adapter exposing a poset's corner tables under the lattice interface."""

    def __init__(self, P):
        self.n = P.n
        self.join = P.join_table
        self.meet = P.meet_table


def _woven_direct(P, members):
    inside = member_mask(P.n, members)
    for a_i, a in enumerate(members):
        for c in members[a_i + 1 :]:
            jn, mt = direct_join(P, a, c), direct_meet(P, a, c)
            if not (jn is not None and inside[jn]) and not (mt is not None and inside[mt]):
                return False, (a, c)
    return True, None


def non_removability_lines(SL, report, limit=None):
    """One line per p in P naming its witness pair by element labels."""
    lab = SL.label
    out = []
    for p in SL.members()[:limit]:
        w = report.witnesses.get(p)
        if w is None:
            out.append(f"witness {lab(p)}: none")
        else:
            out.append(f"witness {lab(p)}: {lab(w[0])} {lab(w[1])}")
    return out


# ---------------------------------------------------------------- pipeline


@dataclass
class PipelineResult:
    graph: Graph
    girth: object
    double_girth: object
    stratified: StratifiedLattice
    report: Report
    glue: dict = None

    def lines(self):
        out = [
            f"graph vertices={self.graph.n} edges={len(self.graph.edges())} girth={self.girth}",
            f"double girth={self.double_girth}",
            f"lattice elements={self.stratified.n} |P|={len(self.stratified.members())}",
        ]
        out += self.report.lines()
        if self.glue is not None:
            out.append(
                f"glue universe={self.glue['universe']} |S|={self.glue['system']} "
                f"removable_pairs={len(self.glue['removable'])}"
            )
        return out


TARGET_GIRTH = 11


def pipeline(G, glue=False):
    """Run the whole construction on a 4-regular graph; low girth only warns."""
    from .sepsys import glue_universe, removable_pairs

    if not G.is_regular(4):
        raise NotFourRegularError(f"degrees {sorted(set(G.degrees()))}, expected 4")
    g = girth(G)
    if g is not None and g < TARGET_GIRTH:
        warnings.warn(f"girth {g} is below {TARGET_GIRTH}; running in experimental mode", GirthWarning)
    D, _ = bipartite_double(G)
    coloring = two_factor_split(D)
    SL = build_lattice(G, coloring)
    report = verify_counterexample(SL)
    if g is not None and g < TARGET_GIRTH:
        report.notes.append(f"warning: girth {g} < {TARGET_GIRTH}")
    result = PipelineResult(G, g, girth(D), SL, report)
    if glue and not isinstance(SL.lattice, LatticeWitness) and report.get("woven").passed:
        U, S = glue_universe(SL.lattice, SL.members())
        free, blocked = removable_pairs(U, S)
        result.glue = {"universe": U.n, "system": len(S), "removable": free, "blocked": blocked, "U": U, "S": S}
    return result


# ------------------------------------------------------------------ search


@dataclass
class BestFound:
    graph: Graph
    girth: object


def _random_regular(n, degree, rng):
    for _ in range(1000):
        stubs = np.repeat(np.arange(n), degree)
        rng.shuffle(stubs)
        pairs = stubs.reshape(-1, 2)
        seen = set()
        ok = True
        for u, v in pairs:
            u, v = int(u), int(v)
            e = (min(u, v), max(u, v))
            if u == v or e in seen:
                ok = False
                break
            seen.add(e)
        if ok:
            return sorted(seen)
    g = nx.random_regular_graph(degree, n, seed=int(rng.integers(2**31)))
    return sorted(tuple(sorted(e)) for e in g.edges())


def _score(G):
    g = girth(G)
    if g is None:
        return (G.n + 1, 0), g, None
    indptr, indices = G.csr()
    closing = np.asarray(_kernels.short_cycle_edges(indptr, indices, g))
    roots = closing[closing[:, 0] >= 0]
    return (g, -len(roots)), g, roots


def high_girth_search(n, degree=4, target_girth=5, seed=0, budget=1000):
    """Random regular graph improved by girth-increasing double edge swaps.

    Each swap replaces an edge that closes a shortest cycle.  Returns a
    :class:`Graph` once ``target_girth`` is reached, otherwise
    :class:`BestFound` with the best graph and its girth.
    """
    if n * degree % 2 or degree >= n:
        raise InfeasibleError(f"no {degree}-regular simple graph on {n} vertices")
    rng = np.random.default_rng(seed)
    edges = sorted(_random_regular(n, degree, rng))
    G = Graph.from_edges(n, edges)
    score, g, roots = _score(G)
    for _ in range(budget):
        if g is None or g >= target_girth:
            break
        u, v = roots[rng.integers(len(roots))]
        a, b = min(u, v), max(u, v)
        c, d = edges[rng.integers(len(edges))]
        if rng.random() < 0.5:
            c, d = d, c
        new1, new2 = tuple(sorted((a, c))), tuple(sorted((b, d)))
        present = set(edges)
        if len({a, b, c, d}) < 4 or new1 in present or new2 in present:
            continue
        trial = sorted((present - {(a, b), tuple(sorted((c, d)))}) | {new1, new2})
        H = Graph.from_edges(n, trial)
        s, h, r = _score(H)
        if s >= score:
            edges, G, g, score, roots = trial, H, h, s, r
    if g is None or g >= target_girth:
        return G
    return BestFound(G, g)
