"""NumPy/Python implementations of the compiled kernels.

Used when the extension is not built or ``PRIVGRAPH_PURE_PYTHON=1``. Results
match ``_ckernels`` exactly; ``louvain_move_pass`` additionally accepts a
``trace`` list for move-by-move inspection.
"""

from __future__ import annotations

from collections import deque

import numpy as np
import scipy.sparse as sp


def louvain_move_pass(indptr, indices, weights, degrees, comm, comm_tot, order,
                      resolution, m, trace=None):
    ip = indptr.tolist()
    ix = indices.tolist()
    wt = weights.tolist()
    deg = degrees.tolist()
    cm = comm.tolist()
    tot = comm_tot.tolist()
    two_m_sq = 2.0 * m * m
    moves = 0
    total = 0.0

    for node in order.tolist():
        c_old = cm[node]
        k_n = deg[node]
        neigh: dict[int, float] = {}
        for e in range(ip[node], ip[node + 1]):
            j = ix[e]
            if j == node:
                continue
            c = cm[j]
            neigh[c] = neigh.get(c, 0.0) + wt[e]

        tot[c_old] -= k_n
        stay = resolution * neigh.get(c_old, 0.0) / m - tot[c_old] * k_n / two_m_sq
        best, best_gain = c_old, stay
        for c, w in neigh.items():
            if c == c_old:
                continue
            g = resolution * w / m - tot[c] * k_n / two_m_sq
            if g > best_gain or (g == best_gain and best != c_old and c < best):
                best, best_gain = c, g
        tot[best] += k_n
        cm[node] = best
        if best != c_old:
            moves += 1
            total += best_gain - stay
            if trace is not None:
                trace.append((node, c_old, best, best_gain - stay))

    comm[:] = cm
    comm_tot[:] = tot
    return total, moves


def _check_nodes(nodes, n, what):
    bad = nodes[(nodes < 0) | (nodes >= n)]
    if len(bad):
        raise ValueError(f"{what} {bad[0]} outside a graph of {n} nodes")


def bfs_eccentricities(indptr, indices, sources, batch: int = 64):
    n = len(indptr) - 1
    sources = np.asarray(sources, dtype=np.int64)
    _check_nodes(sources, n, "source")
    out = np.zeros(len(sources), dtype=np.int64)
    if n == 0 or len(sources) == 0:
        return out
    adj = sp.csr_matrix((np.ones(len(indices), dtype=np.float32), indices, indptr), shape=(n, n))
    for start in range(0, len(sources), batch):
        src = sources[start:start + batch]
        b = len(src)
        cols = np.arange(b)
        visited = np.zeros((n, b), dtype=bool)
        visited[src, cols] = True
        frontier = np.zeros((n, b), dtype=np.float32)
        frontier[src, cols] = 1.0
        ecc = np.zeros(b, dtype=np.int64)
        level = 0
        while True:
            reached = (adj @ frontier) > 0
            reached &= ~visited
            grew = reached.any(axis=0)
            if not grew.any():
                break
            level += 1
            ecc[grew] = level
            visited |= reached
            frontier = reached.astype(np.float32)
        out[start:start + b] = ecc
    return out


def ic_live_counts(indptr, indices, live, seeds):
    ip = indptr.tolist()
    ix = indices.tolist()
    _check_nodes(np.asarray(seeds), len(indptr) - 1, "seed")
    if live.shape[0] and live.shape[1] != len(indices):
        raise ValueError("live mask width differs from the number of edge slots")
    seed_list = list(dict.fromkeys(np.asarray(seeds).tolist()))
    out = np.zeros(live.shape[0], dtype=np.int64)
    for r in range(live.shape[0]):
        # only the slots of activated nodes are ever read
        row = live[r]
        active = set(seed_list)
        queue = deque(seed_list)
        while queue:
            u = queue.popleft()
            lo, hi = ip[u], ip[u + 1]
            if lo == hi:
                continue
            hits = np.flatnonzero(row[lo:hi])
            for h in hits.tolist():
                v = ix[lo + h]
                if v not in active:
                    active.add(v)
                    queue.append(v)
        out[r] = len(active)
    return out


def count_triangles(indptr, indices):
    n = len(indptr) - 1
    if n == 0 or len(indices) == 0:
        return 0
    adj = sp.csr_matrix((np.ones(len(indices), dtype=np.int64), indices, indptr), shape=(n, n))
    return int((adj @ adj).multiply(adj).sum()) // 6
