# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops. Every function mirrors one in ``_pykernels`` and must
produce identical results given identical inputs."""

import numpy as np
cimport numpy as cnp

cnp.import_array()

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64
ctypedef cnp.uint8_t u8


cdef _check_nodes(const i64[::1] nodes, Py_ssize_t n, str what):
    # bounds checking is off below, so reject bad ids before indexing
    cdef Py_ssize_t i
    for i in range(nodes.shape[0]):
        if nodes[i] < 0 or nodes[i] >= n:
            raise ValueError(f"{what} {nodes[i]} outside a graph of {n} nodes")


def louvain_move_pass(const i64[::1] indptr, const i64[::1] indices, const f64[::1] weights,
                      const f64[::1] degrees, i64[::1] comm, f64[::1] comm_tot,
                      const i64[::1] order, double resolution, double m):
    """One sweep of greedy local moves. Mutates ``comm`` and ``comm_tot``.

    Returns ``(total_gain, moves)``.
    """
    cdef Py_ssize_t ncomm = comm_tot.shape[0]
    cdef Py_ssize_t n_order = order.shape[0]
    cdef f64[::1] neigh_w = np.zeros(ncomm, dtype=np.float64)
    cdef i64[::1] touched = np.empty(ncomm, dtype=np.int64)
    cdef u8[::1] mark = np.zeros(ncomm, dtype=np.uint8)
    cdef Py_ssize_t ntouched, t_i, e, idx
    cdef i64 node, c_old, c, best, j, moves = 0
    cdef double k_n, g, best_gain, stay_gain, total = 0.0
    cdef double two_m_sq = 2.0 * m * m

    for idx in range(n_order):
        node = order[idx]
        c_old = comm[node]
        k_n = degrees[node]
        ntouched = 0
        for e in range(indptr[node], indptr[node + 1]):
            j = indices[e]
            if j == node:
                continue
            c = comm[j]
            if not mark[c]:
                mark[c] = 1
                touched[ntouched] = c
                ntouched += 1
            neigh_w[c] += weights[e]

        comm_tot[c_old] -= k_n
        stay_gain = resolution * neigh_w[c_old] / m - comm_tot[c_old] * k_n / two_m_sq
        best = c_old
        best_gain = stay_gain
        for t_i in range(ntouched):
            c = touched[t_i]
            if c == c_old:
                continue
            g = resolution * neigh_w[c] / m - comm_tot[c] * k_n / two_m_sq
            if g > best_gain or (g == best_gain and best != c_old and c < best):
                best = c
                best_gain = g
        comm_tot[best] += k_n
        comm[node] = best
        if best != c_old:
            moves += 1
            total += best_gain - stay_gain

        for t_i in range(ntouched):
            c = touched[t_i]
            neigh_w[c] = 0.0
            mark[c] = 0

    return total, moves


def bfs_eccentricities(const i64[::1] indptr, const i64[::1] indices, const i64[::1] sources):
    """Largest BFS distance reached from each source."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t ns = sources.shape[0]
    cdef i64[::1] dist = np.full(n, -1, dtype=np.int64)
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef i64[::1] visited = np.empty(max(n, 1), dtype=np.int64)
    out = np.zeros(ns, dtype=np.int64)
    cdef i64[::1] out_v = out
    cdef Py_ssize_t s, head, tail, e, nvis, q
    cdef i64 u, v, d, ecc
    _check_nodes(sources, n, "source")

    for s in range(ns):
        u = sources[s]
        head = 0
        tail = 0
        queue[tail] = u
        tail += 1
        dist[u] = 0
        nvis = 0
        visited[nvis] = u
        nvis += 1
        ecc = 0
        while head < tail:
            u = queue[head]
            head += 1
            d = dist[u]
            if d > ecc:
                ecc = d
            for e in range(indptr[u], indptr[u + 1]):
                v = indices[e]
                if dist[v] < 0:
                    dist[v] = d + 1
                    queue[tail] = v
                    tail += 1
                    visited[nvis] = v
                    nvis += 1
        out_v[s] = ecc
        for q in range(nvis):
            dist[visited[q]] = -1
    return out


def ic_live_counts(const i64[::1] indptr, const i64[::1] indices, const u8[:, ::1] live,
                   const i64[::1] seeds):
    """Nodes reachable from ``seeds`` over live directed edge slots, per trial row."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t trials = live.shape[0]
    cdef Py_ssize_t nseeds = seeds.shape[0]
    cdef u8[::1] active = np.zeros(max(n, 1), dtype=np.uint8)
    cdef i64[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    out = np.zeros(trials, dtype=np.int64)
    cdef i64[::1] out_v = out
    cdef Py_ssize_t r, i, head, tail, e
    cdef i64 u, v
    _check_nodes(seeds, n, "seed")
    if trials and live.shape[1] != indices.shape[0]:
        raise ValueError("live mask width differs from the number of edge slots")

    for r in range(trials):
        head = 0
        tail = 0
        for i in range(nseeds):
            u = seeds[i]
            if not active[u]:
                active[u] = 1
                queue[tail] = u
                tail += 1
        while head < tail:
            u = queue[head]
            head += 1
            for e in range(indptr[u], indptr[u + 1]):
                if live[r, e]:
                    v = indices[e]
                    if not active[v]:
                        active[v] = 1
                        queue[tail] = v
                        tail += 1
        out_v[r] = tail
        for i in range(tail):
            active[queue[i]] = 0
    return out


def count_triangles(const i64[::1] indptr, const i64[::1] indices):
    """Triangles in a graph whose CSR neighbor lists are sorted ascending."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t u, a, b, a_end, b_end, e
    cdef i64 v, x, y
    cdef long long total = 0
    for u in range(n):
        for e in range(indptr[u], indptr[u + 1]):
            v = indices[e]
            if v <= u:
                continue
            # common neighbors w > v
            a = e + 1
            a_end = indptr[u + 1]
            b = indptr[v]
            b_end = indptr[v + 1]
            while a < a_end and b < b_end:
                x = indices[a]
                y = indices[b]
                if x < y:
                    a += 1
                elif y < x:
                    b += 1
                else:
                    if x > v:
                        total += 1
                    a += 1
                    b += 1
    return total
