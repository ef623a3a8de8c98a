"""Time the compiled kernels against the pure-Python fallback on one graph.

    python3 benchmarks/bench_kernels.py --nodes 2277 --edges 31421 --repeat 3

Each kernel runs on identical inputs under both backends; outputs are
compared for exact equality before any timing is reported.
"""

import argparse
import time

import numpy as np

from privgraph import _pykernels
from privgraph.community import WeightedSuperGraph
from privgraph.graph import Graph

try:
    from privgraph import _ckernels
except ImportError:
    _ckernels = None


def random_graph(n, m, seed):
    rng = np.random.default_rng(seed)
    edges = set()
    while len(edges) < m:
        u, w = rng.integers(0, n, size=(2, 2 * (m - len(edges))))
        for a, b in zip(u.tolist(), w.tolist()):
            if a != b:
                edges.add((min(a, b), max(a, b)))
    return Graph(n, sorted(edges)[:m])


def cases(g, trials, seed):
    rng = np.random.default_rng(seed)
    indptr, indices = g.csr
    sg = WeightedSuperGraph.from_graph(g)
    s_indptr, s_indices, s_w = sg.csr()
    deg = sg.degrees()
    m = float(deg.sum()) / 2
    order = rng.permutation(g.node_count).astype(np.int64)
    live = (rng.random((trials, len(indices))) < 0.05).view(np.uint8)
    seeds = rng.choice(g.node_count, 20, replace=False).astype(np.int64)
    sources = np.arange(g.node_count, dtype=np.int64)

    def louvain(mod):
        comm = np.arange(g.node_count, dtype=np.int64)
        tot = deg.copy()
        gain, moves = mod.louvain_move_pass(s_indptr, s_indices, s_w, deg, comm, tot, order, 1.0, m)
        return gain, moves, comm.tobytes()

    return {
        "louvain_move_pass": louvain,
        "bfs_eccentricities": lambda mod: mod.bfs_eccentricities(indptr, indices, sources).tobytes(),
        "ic_live_counts": lambda mod: mod.ic_live_counts(indptr, indices, live, seeds).tobytes(),
        "count_triangles": lambda mod: mod.count_triangles(indptr, indices),
    }


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t)
    return min(times), out


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nodes", type=int, default=2277)
    ap.add_argument("--edges", type=int, default=31421)
    ap.add_argument("--trials", type=int, default=200)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if _ckernels is None:
        raise SystemExit("compiled extension not built; run `pip install -e . --no-build-isolation`")

    g = random_graph(args.nodes, args.edges, args.seed)
    print(f"graph: {g.node_count} nodes, {g.edge_count} edges")
    print(f"{'kernel':<20} {'cython s':>10} {'python s':>10} {'speedup':>8}  parity")
    for name, fn in cases(g, args.trials, args.seed).items():
        tc, oc = best_of(lambda: fn(_ckernels), args.repeat)
        tp, op = best_of(lambda: fn(_pykernels), args.repeat)
        print(f"{name:<20} {tc:>10.4f} {tp:>10.4f} {tp / tc:>7.1f}x  {'ok' if oc == op else 'MISMATCH'}")


if __name__ == "__main__":
    main()
