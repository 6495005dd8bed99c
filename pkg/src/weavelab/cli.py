"""``weavelab`` command line.

Exit codes: 0 success or property holds, 1 property fails (a ``witness``
line is printed), 2 usage or parse error, 3 internal invariant violation.
"""
import argparse
import sys
import warnings
from pathlib import Path

from . import _kernels, io
from .counterexample import (
    BestFound,
    GirthWarning,
    Graph,
    ParseError,
    bipartite_double,
    build_lattice,
    girth,
    high_girth_search,
    non_removability_lines,
    pipeline,
    two_factor_split,
)
from .order import (
    InvariantViolation,
    LatticeWitness,
    dedekind_macneille,
    is_distributive,
    is_lattice,
    subset_lattice,
)
from .sepsys import (
    SeparationSystem,
    Universe,
    glue_universe,
    graph_separation_universe,
    is_submodular_in_universe,
    is_submodular_system,
    removable_pairs,
    unravel_Sk,
    unravel_system,
    validate_involution,
)
from .submod import (
    as_rational,
    is_submodular,
    perturb,
    tie_break_constants,
    tie_breaker_rho,
    unravel_order_induced,
)
from .weave import (
    enumerate_posets,
    enumerate_woven_subsets,
    is_woven_family,
    is_woven_in,
    is_woven_poset,
    ravel_step,
    removable_elements,
    unravel_poset,
    unravel_search,
)

OK, FALSE, USAGE, INVARIANT = 0, 1, 2, 3


class UsageError(Exception):
    pass


class Output:
    """Collects report lines; writes them to ``--out`` or stdout."""

    def __init__(self, args):
        self.path = getattr(args, "out", None)
        self.lines = []

    def __call__(self, line=""):
        self.lines.append(str(line))

    def flush(self):
        text = "\n".join(self.lines) + ("\n" if self.lines else "")
        if self.path:
            Path(self.path).write_text(text)
        else:
            sys.stdout.write(text)


# ------------------------------------------------------------------ loaders


def _lattice_from(args, required=True):
    if getattr(args, "subset_lattice", None) is not None:
        return subset_lattice(args.subset_lattice)
    path = getattr(args, "lattice", None) or getattr(args, "in_lattice", None)
    if path is None:
        if required:
            raise UsageError("a lattice is required (--lattice FILE or --subset-lattice N)")
        return None
    P, _ = io.load_poset(path)
    L = is_lattice(P)
    if isinstance(L, LatticeWitness):
        raise UsageError(f"{path} is not a lattice: no {L.kind} of {L.pair[0]} {L.pair[1]}")
    return L


def _members(args, L):
    text = getattr(args, "members", None)
    if text is None:
        return list(range(L.n))
    if text.strip() in ("", "-"):
        return []
    try:
        items = sorted({int(t) for t in text.replace(",", " ").split()})
    except ValueError:
        raise UsageError(f"bad member list {text!r}") from None
    if any(not 0 <= x < L.n for x in items):
        raise UsageError(f"members must lie in 0..{L.n - 1}")
    return items


def _graph(args):
    return io.load_graph(args.graph, getattr(args, "graph_format", None))


# ------------------------------------------------------------- subcommands


def cmd_check_lattice(args, out):
    P, _ = io.load_poset(args.file)
    L = is_lattice(P)
    if isinstance(L, LatticeWitness):
        a, b = L.pair
        bounds = " ".join(str(x) for x in L.bounds) or "none"
        out(f"lattice: no ({L.kind} of {P.label(a)} {P.label(b)} missing)")
        out(f"witness {a} {b} {L.kind} bounds {bounds}")
        return FALSE
    out(f"lattice: yes elements={L.n} top={L.top} bottom={L.bottom}")
    return OK


def cmd_check_distributive(args, out):
    args.lattice = args.file
    L = _lattice_from(args)
    ok, triple = is_distributive(L)
    if ok:
        out("distributive: yes")
        return OK
    out("distributive: no")
    out("witness " + " ".join(str(x) for x in triple))
    return FALSE


def cmd_check_woven(args, out):
    if args.family:
        F = io.load_family(args.family)
        ok, wit = is_woven_family(F)
        if ok:
            out(f"woven: yes sets={len(F)}")
            return OK
        x, y = wit
        fmt = lambda m: " ".join(str(i + 1) for i in range(F.ground) if m >> i & 1) or "-"  # noqa: E731
        out("woven: no")
        out(f"witness {{{fmt(x)}}} {{{fmt(y)}}}")
        return FALSE
    if args.poset:
        P, _ = io.load_poset(args.poset)
        ok, wit = is_woven_poset(P)
        lab = P.label
    else:
        L = _lattice_from(args)
        P = _members(args, L)
        ok, wit = is_woven_in(L, P)
        lab = L.label
    if ok:
        out("woven: yes")
        return OK
    out("woven: no")
    out(f"witness {wit[0]} {wit[1]}  # {lab(wit[0])} {lab(wit[1])}")
    return FALSE


def cmd_ravel(args, out):
    L = _lattice_from(args)
    P = _members(args, L)
    ok, wit = is_woven_in(L, P)
    if not ok:
        out(f"witness {wit[0]} {wit[1]}")
        return FALSE
    p = ravel_step(L, P)
    out(f"add {p}  # {L.label(p)}")
    return OK


def cmd_removable(args, out):
    L = _lattice_from(args)
    P = _members(args, L)
    ok, wit = is_woven_in(L, P)
    if not ok:
        out(f"witness {wit[0]} {wit[1]}")
        return FALSE
    rem = removable_elements(L, P)
    out("removable " + (" ".join(str(x) for x in rem) or "none"))
    return OK


def _emit_trace(out, trace, label):
    for line in trace.lines(label):
        out(line)
    if trace.ok:
        return OK
    last = trace.certificates[-1] if trace.certificates else None
    if last is not None and not last.woven:
        out(f"witness {last.witness[0]} {last.witness[1]}")
    else:
        # no element of the remaining set can be removed
        rest = sorted(set(trace.start) - set(trace.removals))
        out("witness " + " ".join(str(x) for x in rest))
    return FALSE


def cmd_unravel(args, out):
    if args.strategy == "proof":
        if not args.poset:
            raise UsageError("--strategy proof needs --poset FILE")
        P, _ = io.load_poset(args.poset)
        ok, wit = is_woven_poset(P)
        if not ok:
            out(f"witness {wit[0]} {wit[1]}")
            return FALSE
        return _emit_trace(out, unravel_poset(P), P.label if args.labels else str)
    L = _lattice_from(args)
    label = L.label if args.labels else str
    if args.strategy == "order-induced":
        if not args.vals or args.k is None:
            raise UsageError("--strategy order-induced needs --vals FILE and --k RATIONAL")
        f = io.load_values(args.vals, L)
        ok, wit = is_submodular(L, f)
        if not ok:
            out("submodular: no")
            out(f"witness {wit[0]} {wit[1]}")
            return FALSE
        return _emit_trace(out, unravel_order_induced(L, f, _rational(args.k)), label)
    P = _members(args, L)
    ok, wit = is_woven_in(L, P)
    if not ok:
        out(f"witness {wit[0]} {wit[1]}")
        return FALSE
    return _emit_trace(out, unravel_search(L, P, args.strategy), label)


def _rational(text):
    try:
        return as_rational(text)
    except (TypeError, ValueError, ZeroDivisionError):
        raise UsageError(f"not an exact rational: {text!r}") from None


def cmd_tiebreak(args, out):
    L = _lattice_from(args)
    rho = tie_breaker_rho(L)
    if not args.vals:
        for x in range(L.n):
            out(f"{x} {rho[x]}")
        return OK
    f = io.load_values(args.vals, L)
    ok, wit = is_submodular(L, f)
    if not ok:
        out(f"witness {wit[0]} {wit[1]}")
        return FALSE
    eps, c = tie_break_constants(f, rho)
    out(f"# eps={eps} c={c}")
    g = perturb(L, f, rho)
    for x in range(L.n):
        out(f"{x} {g[x]}")
    return OK


def cmd_dmc(args, out):
    P, _ = io.load_poset(args.file)
    L, emb, _ = dedekind_macneille(P)
    if args.format == "dot":
        out(io.to_dot(L.poset, members=emb, name="completion").rstrip("\n"))
        return OK
    out(io.format_poset(L.poset).rstrip("\n"))
    for x, e in enumerate(emb):
        out(f"# embed {x} {e}")
    return OK


def _load_system(path):
    P, inv = io.load_poset(path)
    if inv is None:
        raise UsageError(f"{path} has no 'inv' lines")
    return P, inv


def cmd_sepsys_check(args, out):
    P, inv = _load_system(args.file)
    ok, wit = validate_involution(P, inv)
    if not ok:
        out("involution: invalid")
        kind, detail = wit
        detail = " ".join(str(x) for x in detail) if isinstance(detail, tuple) else str(detail)
        out(f"witness {kind} {detail}")
        return FALSE
    out("involution: ok")
    S = SeparationSystem(P, inv)
    L = is_lattice(P) if P.n else None
    if L is not None and not isinstance(L, LatticeWitness):
        out("universe: yes")
        if args.members is not None:
            members = _members(args, L)
            ok, wit = is_submodular_in_universe(Universe(L, inv), members)
            out(f"submodular in universe: {'yes' if ok else 'no'}")
            if not ok:
                out(f"witness {wit[0]} {wit[1]}")
                return FALSE
            return OK
    else:
        out("universe: no")
    ok, wit = is_submodular_system(S)
    out(f"submodular: {'yes' if ok else 'no'}")
    if not ok:
        out(f"witness {wit[0]} {wit[1]}")
        return FALSE
    return OK


def cmd_sepsys_unravel(args, out):
    P, inv = _load_system(args.file)
    if args.vals:
        L = is_lattice(P)
        if isinstance(L, LatticeWitness):
            raise UsageError("order-function unravelling needs a universe (lattice) input")
        U = Universe(L, inv)
        f = io.load_values(args.vals, L)
        if args.k is None:
            raise UsageError("--vals needs --k")
        trace = unravel_Sk(U, f, _rational(args.k))
    else:
        S = SeparationSystem(P, inv)
        ok, wit = is_submodular_system(S)
        if not ok:
            out(f"witness {wit[0]} {wit[1]}")
            return FALSE
        trace = unravel_system(S)
    for line in trace.lines(P.label if args.labels else str):
        out(line)
    return OK if trace.ok else FALSE


def cmd_glue(args, out):
    L = _lattice_from(args)
    P = _members(args, L)
    U, S = glue_universe(L, P)
    out(f"universe elements={U.n} |S|={len(S)}")
    out("S " + " ".join(str(s) for s in S))
    ok, wit = is_woven_in(L, P)
    if ok:
        free, blocked = removable_pairs(U, S)
        out("removable pairs " + (" ".join(f"{a},{b}" for a, b in free) or "none"))
        for s, (q, r) in sorted(blocked.items()):
            out(f"blocked {s},{U.inv[s]} by {q} {r}")
    if args.universe_out:
        io.save_poset(args.universe_out, U.lattice.poset, U.inv)
    return OK


def cmd_graph_universe(args, out):
    G = _graph(args)
    U, f = graph_separation_universe(G, cap=args.cap)
    out(f"separations={U.n} unoriented={len({min(s, U.inv[s]) for s in range(U.n)})}")
    for s in range(U.n):
        out(f"{s} {U.lattice.label(s)} inv={U.inv[s]} order={f[s]}")
    if args.universe_out:
        io.save_poset(args.universe_out, U.lattice.poset, U.inv)
    if args.vals_out:
        Path(args.vals_out).write_text(io.format_values(f))
    return OK


def cmd_counterexample(args, out):
    if args.action == "search":
        if args.seed is None:
            raise UsageError("counterexample search requires --seed")
        res = high_girth_search(args.n, args.degree, args.target_girth, args.seed, args.budget)
        G = res.graph if isinstance(res, BestFound) else res
        g = girth(G)
        out(f"search n={args.n} degree={args.degree} seed={args.seed} girth={g} "
            f"target={args.target_girth} {'reached' if isinstance(res, Graph) else 'best-found'}")
        if args.graph_out:
            fmt = "graph6" if Path(args.graph_out).suffix in (".g6", ".graph6") else "edgelist"
            io.save_graph(args.graph_out, G, fmt)
        else:
            out(io.format_edges(G).rstrip("\n"))
        return OK if isinstance(res, Graph) else FALSE
    if args.graph is None:
        raise UsageError("a graph file is required")
    G = _graph(args)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", GirthWarning)
        if args.action == "build":
            D, _ = bipartite_double(G)
            SL = build_lattice(G, two_factor_split(D))
            if args.format == "dot":
                out(io.to_dot(SL.poset, members=SL.members(), ranks=SL.stratum, name="stratified").rstrip("\n"))
            else:
                out(f"graph vertices={G.n} girth={girth(G)} double girth={girth(D)}")
                out(f"elements={SL.n} |P|={len(SL.members())} "
                    f"lattice={'no' if isinstance(SL.lattice, LatticeWitness) else 'yes'}")
                if args.poset_out:
                    io.save_poset(args.poset_out, SL.poset)
            return OK
        result = pipeline(G, glue=args.glue)
    for line in result.lines():
        out(line)
    if args.witnesses:
        for line in non_removability_lines(result.stratified, result.report):
            out(line)
    report = result.report
    if not report.consistent:
        raise InvariantViolation("a failed certificate lacks a re-validated witness")
    if report.ok:
        return OK
    failed = next(c for c in report.certificates if not c.passed)
    w = failed.witness
    lab = result.stratified.label
    if isinstance(w, LatticeWitness):
        out(f"witness {w.pair[0]} {w.pair[1]}  # {lab(w.pair[0])} {lab(w.pair[1])}")
    elif isinstance(w, tuple):
        out(f"witness {w[0]} {w[1]}  # {lab(w[0])} {lab(w[1])}")
    else:
        out(f"witness {w}  # {lab(w)}")
    return FALSE


def cmd_enumerate(args, out):
    if args.kind == "posets":
        if args.n is None:
            raise UsageError("enumerate posets needs --n")
        count = 0
        woven = 0
        for P in enumerate_posets(args.n):
            count += 1
            woven += is_woven_poset(P)[0]
            if args.list:
                out("covers " + " ".join(f"{a}<{b}" for a, b in P.covers))
        out(f"posets n={args.n} count={count} woven={woven}")
        return OK
    L = _lattice_from(args)
    count = 0
    for subset in enumerate_woven_subsets(L):
        count += 1
        if args.list:
            out("woven " + (" ".join(str(x) for x in subset) or "-"))
    out(f"woven subsets={count} of {1 << L.n}")
    return OK


def cmd_export_dot(args, out):
    if args.poset:
        P, _ = io.load_poset(args.poset)
        members = None
        if args.members is not None:
            members = [int(t) for t in args.members.replace(",", " ").split()]
        if args.format == "text":
            out(io.format_poset(P).rstrip("\n"))
        else:
            out(io.to_dot(P, members=members).rstrip("\n"))
        return OK
    L = _lattice_from(args)
    members = _members(args, L) if args.members is not None else None
    if args.format == "text":
        out(io.format_poset(L.poset).rstrip("\n"))
    else:
        out(io.to_dot(L.poset, members=members).rstrip("\n"))
    return OK


# ------------------------------------------------------------------- parser


def _lattice_opts(p):
    p.add_argument("--lattice", help=".poset file describing a lattice")
    p.add_argument("--subset-lattice", type=int, metavar="N", help="use the power-set lattice of {1..N}")
    p.add_argument("--members", help="comma or space separated element indices (default: all)")


def build_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", help="write the report to this file instead of stdout")
    common.add_argument("--format", choices=("text", "dot"), help="text (default) or dot; export-dot defaults to dot")
    common.add_argument("--threads", type=int, help="worker threads for parallel kernels")
    common.add_argument("--labels", action="store_true", help="print element labels in traces")

    ap = argparse.ArgumentParser(prog="weavelab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-lattice", parents=[common], help="is the poset a lattice?")
    p.add_argument("file")
    p.set_defaults(func=cmd_check_lattice)

    p = sub.add_parser("check-distributive", parents=[common], help="distributive laws on all triples")
    p.add_argument("file", nargs="?")
    p.add_argument("--subset-lattice", type=int, metavar="N")
    p.set_defaults(func=cmd_check_distributive)

    p = sub.add_parser("check-woven", parents=[common], help="wovenness of a subset, poset or family")
    grp = p.add_mutually_exclusive_group(required=True)
    grp.add_argument("--in-lattice", metavar="FILE")
    grp.add_argument("--subset-lattice", type=int, metavar="N")
    grp.add_argument("--poset", metavar="FILE")
    grp.add_argument("--family", metavar="FILE")
    p.add_argument("--members")
    p.set_defaults(func=cmd_check_woven)

    p = sub.add_parser("ravel", parents=[common], help="add a maximal element of the complement")
    _lattice_opts(p)
    p.set_defaults(func=cmd_ravel)

    p = sub.add_parser("removable", parents=[common], help="elements whose removal keeps P woven")
    _lattice_opts(p)
    p.set_defaults(func=cmd_removable)

    p = sub.add_parser("unravel", parents=[common], help="unravel a woven set or poset")
    _lattice_opts(p)
    p.add_argument("--strategy", choices=("greedy", "backtrack", "proof", "order-induced"), default="greedy")
    p.add_argument("--poset", metavar="FILE", help="woven poset for --strategy proof")
    p.add_argument("--vals", metavar="FILE")
    p.add_argument("--k", metavar="RATIONAL")
    p.set_defaults(func=cmd_unravel)

    p = sub.add_parser("tiebreak", parents=[common], help="tie-breaker values, or perturbed values with --vals")
    _lattice_opts(p)
    p.add_argument("--vals", metavar="FILE")
    p.set_defaults(func=cmd_tiebreak)

    p = sub.add_parser("dmc", parents=[common], help="Dedekind-MacNeille completion")
    p.add_argument("file")
    p.set_defaults(func=cmd_dmc)

    p = sub.add_parser("sepsys-check", parents=[common], help="validate a separation system")
    p.add_argument("file")
    p.add_argument("--members")
    p.set_defaults(func=cmd_sepsys_check)

    p = sub.add_parser("sepsys-unravel", parents=[common], help="pair-by-pair unravelling")
    p.add_argument("file")
    p.add_argument("--vals", metavar="FILE")
    p.add_argument("--k", metavar="RATIONAL")
    p.set_defaults(func=cmd_sepsys_unravel)

    p = sub.add_parser("glue", parents=[common], help="glue a lattice to its dual")
    _lattice_opts(p)
    p.add_argument("--universe-out", metavar="FILE", help="write the glued universe as .poset with inv lines")
    p.set_defaults(func=cmd_glue)

    p = sub.add_parser("graph-universe", parents=[common], help="universe of separations of a small graph")
    p.add_argument("graph")
    p.add_argument("--graph-format", choices=("graph6", "edgelist"))
    p.add_argument("--cap", type=int, default=5)
    p.add_argument("--universe-out", metavar="FILE")
    p.add_argument("--vals-out", metavar="FILE")
    p.set_defaults(func=cmd_graph_universe)

    p = sub.add_parser("counterexample", parents=[common], help="high-girth lattice construction")
    p.add_argument("action", choices=("build", "verify", "search"))
    p.add_argument("graph", nargs="?")
    p.add_argument("--graph-format", choices=("graph6", "edgelist"))
    p.add_argument("--glue", action="store_true", help="also glue and sweep all pairs")
    p.add_argument("--witnesses", action="store_true", help="print the witness pair of every p")
    p.add_argument("--poset-out", metavar="FILE")
    p.add_argument("--graph-out", metavar="FILE")
    p.add_argument("--n", type=int, default=40)
    p.add_argument("--degree", type=int, default=4)
    p.add_argument("--target-girth", type=int, default=5)
    p.add_argument("--budget", type=int, default=1000)
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_counterexample)

    p = sub.add_parser("enumerate", parents=[common], help="woven subsets of a lattice, or labeled posets")
    p.add_argument("kind", choices=("woven", "posets"))
    _lattice_opts(p)
    p.add_argument("--n", type=int)
    p.add_argument("--list", action="store_true")
    p.set_defaults(func=cmd_enumerate)

    p = sub.add_parser("export-dot", parents=[common], help="Hasse diagram export")
    _lattice_opts(p)
    p.add_argument("--poset", metavar="FILE")
    p.set_defaults(func=cmd_export_dot)
    return ap


def run(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return USAGE if exc.code else OK
    if args.threads:
        _kernels.set_threads(args.threads)
    out = Output(args)
    try:
        code = args.func(args, out)
    except InvariantViolation as exc:
        out(f"invariant violation: {exc}")
        code = INVARIANT
    except (UsageError, ParseError, FileNotFoundError, ValueError, TypeError) as exc:
        out.flush()
        print(f"error: {exc}", file=sys.stderr)
        return USAGE
    out.flush()
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
