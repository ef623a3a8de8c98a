"""Influence maximization case study: Degree-Discount seeds, Independent Cascade spread."""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from . import kernels
from .dp import make_rng
from .graph import Graph, degree_sequence

DEFAULT_P = 0.01
DEFAULT_TRIALS = 1000
_LIVE_CELLS = 1 << 24


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    std: float
    trials: int


def degree_discount(g: Graph, k: int, p: float = DEFAULT_P) -> list[int]:
    """Degree-Discount heuristic; ties go to the lower node id."""
    n = g.node_count
    if k < 0 or k > n:
        raise ValueError(f"cannot pick {k} seeds from {n} nodes")
    deg = degree_sequence(g).astype(np.float64)
    t = np.zeros(n, dtype=np.int64)
    score = deg.copy()
    heap = [(-score[v], v) for v in range(n)]
    heapq.heapify(heap)
    chosen: list[int] = []
    picked = np.zeros(n, dtype=bool)
    while len(chosen) < k:
        neg, v = heapq.heappop(heap)
        if picked[v] or -neg != score[v]:
            continue
        picked[v] = True
        chosen.append(v)
        for w in g.neighbors(v).tolist():
            if picked[w]:
                continue
            t[w] += 1
            score[w] = deg[w] - 2 * t[w] - (deg[w] - t[w]) * t[w] * p
            heapq.heappush(heap, (-score[w], w))
    return chosen


def ic_spread(g: Graph, seeds, p: float = DEFAULT_P, trials: int = DEFAULT_TRIALS, rng=None) -> SpreadEstimate:
    """Monte-Carlo Independent Cascade spread.

    Every directed adjacency slot gets one coin per trial, so each activated
    node tries each neighbor exactly once. ``std`` is the population value.
    """
    if not 0.0 <= p <= 1.0:
        raise ValueError(f"propagation probability {p!r} outside [0, 1]")
    if trials < 1:
        raise ValueError("need at least one trial")
    seeds = np.asarray(list(dict.fromkeys(int(s) for s in seeds)), dtype=np.int64)
    if len(seeds) and (seeds.min() < 0 or seeds.max() >= g.node_count):
        raise ValueError("seed outside the graph")
    indptr, indices = g.csr
    nnz = len(indices)
    if p == 0.0 or nnz == 0:
        return SpreadEstimate(float(len(seeds)), 0.0, trials)
    if p == 1.0:
        live = np.ones((1, nnz), dtype=np.uint8)
        count = float(kernels.ic_live_counts(indptr, indices, live, seeds)[0])
        return SpreadEstimate(count, 0.0, trials)
    rng = make_rng(rng)
    batch = max(1, _LIVE_CELLS // nnz)
    counts = []
    for start in range(0, trials, batch):
        b = min(batch, trials - start)
        live = (rng.random((b, nnz)) < p).view(np.uint8)
        counts.append(kernels.ic_live_counts(indptr, indices, live, seeds))
    c = np.concatenate(counts).astype(np.float64)
    return SpreadEstimate(float(c.mean()), float(c.std()), trials)
