"""Text formats: .poset (with optional ``inv`` lines), .fam, .vals, .edges,
graph6, and DOT export of Hasse diagrams."""
from pathlib import Path

import networkx as nx

from .counterexample import Graph, ParseError
from .order import Poset, poset_from_relations
from .submod import ValueTable, as_rational
from .weave import SetFamily


def _lines(text):
    """Yield ``(line_number, tokens)`` for non-blank lines with comments stripped."""
    for no, raw in enumerate(text.splitlines(), 1):
        body = raw.split("#", 1)[0].strip()
        if body:
            yield no, body.split()


def _read(path):
    return Path(path).read_text()


def _int(tok, no):
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"line {no}: expected an integer, got {tok!r}") from None


def _header(lines, keyword):
    try:
        no, toks = next(lines)
    except StopIteration:
        raise ParseError(f"empty input, expected '{keyword} <n>'") from None
    if len(toks) != 2 or toks[0] != keyword:
        raise ParseError(f"line {no}: expected '{keyword} <n>'")
    n = _int(toks[1], no)
    if n < 0:
        raise ParseError(f"line {no}: negative size")
    return n


# ------------------------------------------------------------------- posets


def parse_poset(text):
    """Parse .poset text; returns ``(poset, inv)`` with ``inv`` None when absent.

    Lines: ``poset <n>``, then ``<a> <b>`` for a < b, ``inv <a> <b>`` for
    involution pairs, and ``label <i> <name>`` to name elements.
    """
    lines = _lines(text)
    n = _header(lines, "poset")
    pairs, inv, labels = [], None, None
    for no, toks in lines:
        if toks[0] == "inv":
            if len(toks) != 3:
                raise ParseError(f"line {no}: expected 'inv <a> <b>'")
            a, b = _int(toks[1], no), _int(toks[2], no)
            _check_range(no, n, a, b)
            inv = inv if inv is not None else [None] * n
            for x, y in ((a, b), (b, a)):
                if inv[x] is not None and inv[x] != y:
                    raise ParseError(f"line {no}: element {x} already paired with {inv[x]}")
                inv[x] = y
        elif toks[0] == "label":
            if len(toks) != 3:
                raise ParseError(f"line {no}: expected 'label <i> <name>'")
            i = _int(toks[1], no)
            _check_range(no, n, i)
            labels = labels or [str(x) for x in range(n)]
            labels[i] = toks[2]
        else:
            if len(toks) != 2:
                raise ParseError(f"line {no}: expected '<a> <b>'")
            a, b = _int(toks[0], no), _int(toks[1], no)
            _check_range(no, n, a, b)
            pairs.append((a, b))
    if inv is not None and None in inv:
        raise ParseError(f"involution misses element {inv.index(None)}")
    return poset_from_relations(n, pairs, labels), (tuple(inv) if inv is not None else None)


def _check_range(no, n, *xs):
    for x in xs:
        if not 0 <= x < n:
            raise ParseError(f"line {no}: element {x} outside 0..{n - 1}")


def format_poset(P, inv=None):
    out = [f"poset {P.n}"]
    if P.labels is not None:
        out += [f"label {i} {P.labels[i]}" for i in range(P.n) if P.labels[i] != str(i)]
    out += [f"{a} {b}" for a, b in P.covers]
    if inv is not None:
        out += [f"inv {s} {inv[s]}" for s in range(P.n) if s <= inv[s]]
    return "\n".join(out) + "\n"


def load_poset(path):
    return parse_poset(_read(path))


def save_poset(path, P, inv=None):
    Path(path).write_text(format_poset(P, inv))


# ----------------------------------------------------------------- families


def parse_family(text):
    """``ground <n>`` then one set per line (1-based elements, ``-`` for the empty set)."""
    lines = _lines(text)
    n = _header(lines, "ground")
    sets = []
    for no, toks in lines:
        if toks == ["-"]:
            sets.append(())
            continue
        sets.append(tuple(_int(t, no) for t in toks))
    try:
        return SetFamily.from_sets(n, sets)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_family(F):
    out = [f"ground {F.ground}"]
    for s in F.sets:
        elems = [str(i + 1) for i in range(F.ground) if s >> i & 1]
        out.append(" ".join(elems) if elems else "-")
    return "\n".join(out) + "\n"


def load_family(path):
    return parse_family(_read(path))


# ------------------------------------------------------------------- values


def parse_values(text, lattice):
    """``<element> <p/q>`` lines; every element must get exactly one value."""
    vals = [None] * lattice.n
    for no, toks in _lines(text):
        if len(toks) != 2:
            raise ParseError(f"line {no}: expected '<element> <value>'")
        x = _int(toks[0], no)
        _check_range(no, lattice.n, x)
        if vals[x] is not None:
            raise ParseError(f"line {no}: element {x} given twice")
        try:
            vals[x] = as_rational(toks[1])
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"line {no}: not an exact rational: {toks[1]!r}") from None
    if None in vals:
        raise ParseError(f"no value for element {vals.index(None)}")
    return ValueTable(lattice, vals)


def format_values(f):
    return "".join(f"{x} {v}\n" for x, v in enumerate(f.values))


def load_values(path, lattice):
    return parse_values(_read(path), lattice)


# ------------------------------------------------------------------- graphs


def parse_edges(text):
    lines = _lines(text)
    n = _header(lines, "graph")
    edges = []
    for no, toks in lines:
        if len(toks) != 2:
            raise ParseError(f"line {no}: expected '<u> <v>'")
        edges.append((_int(toks[0], no), _int(toks[1], no)))
    return Graph.from_edges(n, edges)


def format_edges(G):
    return f"graph {G.n}\n" + "".join(f"{u} {v}\n" for u, v in G.edges())


def parse_graph6(data):
    if isinstance(data, str):
        data = data.encode()
    data = data.strip()
    if data.startswith(b">>graph6<<"):
        data = data[len(b">>graph6<<"):]
    try:
        g = nx.from_graph6_bytes(data)
    except (ValueError, nx.NetworkXError) as exc:
        raise ParseError(f"bad graph6 data: {exc}") from None
    return Graph.from_edges(g.number_of_nodes(), g.edges())


def format_graph6(G):
    return nx.to_graph6_bytes(G.to_networkx(), header=False).decode()


def load_graph(path, format=None):
    """Read a graph; format is ``graph6`` or ``edgelist``, guessed from the suffix when omitted."""
    path = Path(path)
    if format is None:
        format = "graph6" if path.suffix in (".g6", ".graph6") else "edgelist"
    if format == "graph6":
        return parse_graph6(path.read_bytes())
    if format in ("edgelist", "edges"):
        return parse_edges(path.read_text())
    raise ValueError(f"unknown graph format {format!r}")


def save_graph(path, G, format="edgelist"):
    text = format_graph6(G) if format == "graph6" else format_edges(G)
    Path(path).write_text(text)


# ---------------------------------------------------------------------- DOT


def _quote(s):
    return '"' + str(s).replace("\\", "\\\\").replace('"', '\\"') + '"'


def to_dot(P, members=None, ranks=None, name="poset"):
    """Hasse diagram drawn bottom to top; ``members`` are highlighted and
    ``ranks`` (element -> group name) become ``rank=same`` subgraphs."""
    if isinstance(P, Poset):
        poset = P
    else:
        poset = P.poset
    highlight = set(members or ())
    out = [f"digraph {name} {{", "  rankdir=BT;", "  node [shape=circle];"]
    for x in range(poset.n):
        attrs = f"label={_quote(poset.label(x))}"
        if x in highlight:
            attrs += ", style=filled, fillcolor=lightgrey"
        out.append(f"  {x} [{attrs}];")
    if ranks is not None:
        groups = {}
        for x in range(poset.n):
            groups.setdefault(ranks[x], []).append(x)
        for group, xs in groups.items():
            out.append("  { rank=same; " + " ".join(str(x) for x in xs) + "; }  // " + str(group))
    for a, b in poset.covers:
        out.append(f"  {a} -> {b};")
    out.append("}")
    return "\n".join(out) + "\n"
