"""Time each kernel on its numba and numpy paths.

    python benchmarks/bench_kernels.py [--repeat 3]

The numba functions are called once before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np

from weavelab import _kernels as K
from weavelab import io, robertson_path
from weavelab.counterexample import Graph, bipartite_double, build_lattice, two_factor_split
from weavelab.order import poset_from_relations, subset_lattice


def _best(fn, args, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn(*args)
        times.append(time.perf_counter() - t)
    return min(times)


def cases():
    rng = np.random.default_rng(0)
    n = 600
    pairs = [(a, b) for a in range(n) for b in range(a + 1, n) if rng.random() < 0.01]
    P = poset_from_relations(n, pairs)
    strict = P.leq & ~np.eye(n, dtype=bool)
    yield "corner_table (600-element poset)", "corner_table", (P._rank_up_bits, P.linear_extension)
    yield "cover_matrix (600-element poset)", "cover_matrix", (K.pack_rows(strict), K.pack_rows(strict.T))

    L = subset_lattice(4)
    J, M = np.asarray(L.join), np.asarray(L.meet)
    yield "woven_mask_table (2^[4], 65536 masks)", "woven_mask_table", (J, M)
    table = K.woven_mask_table_np(J, M)
    yield "unravel_table (2^[4])", "unravel_table", (table,)

    G = io.load_graph(robertson_path())
    D, _ = bipartite_double(G)
    SL = build_lattice(G, two_factor_split(D))
    member = np.zeros(SL.n, dtype=bool)
    member[SL.members()] = True
    yield "woven_witness (Robertson construction)", "woven_witness", (SL.poset.join_table, SL.poset.meet_table, member)

    ring = Graph.from_edges(2000, [(i, (i + 1) % 2000) for i in range(2000)] + [(i, (i + 7) % 2000) for i in range(2000)])
    indptr, indices = ring.csr()
    yield "girth (2000-vertex circulant)", "girth", (indptr, indices)
    g = int(K.girth_np(indptr, indices))
    yield f"short_cycle_edges (same graph, g={g})", "short_cycle_edges", (indptr, indices, g)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if not K.USE_NUMBA:
        print("numba path disabled; only the numpy timings are meaningful")
    print(f"{'kernel':45s} {'numpy':>10s} {'numba':>10s} {'speed-up':>9s}")
    for title, name, inputs in cases():
        np_fn = getattr(K, f"{name}_np")
        t_np = _best(np_fn, inputs, args.repeat)
        if K.USE_NUMBA:
            nb_fn = getattr(K, f"{name}_nb")
            nb_fn(*inputs)
            t_nb = _best(nb_fn, inputs, args.repeat)
            print(f"{title:45s} {t_np * 1e3:9.2f}ms {t_nb * 1e3:9.2f}ms {t_np / t_nb:8.1f}x")
        else:
            print(f"{title:45s} {t_np * 1e3:9.2f}ms {'-':>10s}")


if __name__ == "__main__":
    main()
