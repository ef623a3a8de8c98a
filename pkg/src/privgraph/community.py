"""Private community division: randomized super-nodes, noisy Louvain, EM adjustment."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from . import _pykernels, kernels
from .dp import (
    PARALLEL,
    PHASE_ADJUST,
    PHASE_INIT,
    SENS_CONNECTION,
    SENS_INNER,
    SENS_OUTER,
    SEQUENTIAL,
    InvalidBudgetError,
    PrivacyLedger,
    em_select,
    laplace_perturb,
    make_rng,
    norm_sub,
)
from .graph import Graph

LOUVAIN_TOL = 1e-7


class UndefinedModularityError(ValueError):
    pass


class ConfigError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class Partition:
    """Community label per node, numbered densely from 0 with no empty community."""

    assignment: np.ndarray

    def __post_init__(self):
        a = np.asarray(self.assignment, dtype=np.int64)
        if a.size:
            _, dense = np.unique(a, return_inverse=True)
            a = dense.astype(np.int64).reshape(-1)
        a.setflags(write=False)
        object.__setattr__(self, "assignment", a)

    @property
    def node_count(self) -> int:
        return len(self.assignment)

    @property
    def community_count(self) -> int:
        return int(self.assignment.max()) + 1 if self.assignment.size else 0

    def sizes(self) -> np.ndarray:
        return np.bincount(self.assignment, minlength=self.community_count)

    @cached_property
    def members(self) -> list[np.ndarray]:
        order = np.argsort(self.assignment, kind="stable")
        bounds = np.cumsum(self.sizes())[:-1]
        return np.split(order, bounds) if self.assignment.size else []

    def __eq__(self, other):
        if not isinstance(other, Partition):
            return NotImplemented
        return np.array_equal(self.assignment, other.assignment)

    def __repr__(self):
        return f"Partition(nodes={self.node_count}, communities={self.community_count})"


@dataclass(frozen=True, eq=False)
class WeightedSuperGraph:
    """Super-nodes with inner weights and pairwise outer weights.

    ``inner[i]`` counts each internal edge twice (the degree sum inside the
    super-node), so it acts as the diagonal of the weighted adjacency matrix.
    ``pairs`` holds ``i < j`` rows, ``outer`` the matching weights.
    """

    inner: np.ndarray
    pairs: np.ndarray
    outer: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "inner", np.asarray(self.inner, dtype=np.float64))
        pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)
        object.__setattr__(self, "pairs", pairs)
        object.__setattr__(self, "outer", np.asarray(self.outer, dtype=np.float64).reshape(-1))
        if len(self.pairs) != len(self.outer):
            raise ValueError("pairs and outer weights differ in length")

    @property
    def size(self) -> int:
        return len(self.inner)

    @classmethod
    def from_graph(cls, g: Graph) -> "WeightedSuperGraph":
        return cls(np.zeros(g.node_count), g.edges, np.ones(g.edge_count))

    def degrees(self) -> np.ndarray:
        n = self.size
        return (
            self.inner
            + np.bincount(self.pairs[:, 0], self.outer, minlength=n)
            + np.bincount(self.pairs[:, 1], self.outer, minlength=n)
        )

    def total_weight(self) -> float:
        return float(self.degrees().sum()) / 2.0

    def csr(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Symmetric off-diagonal adjacency, zero weights dropped."""
        keep = self.outer != 0
        p, w = self.pairs[keep], self.outer[keep]
        n = self.size
        mat = sp.coo_matrix(
            (np.concatenate([w, w]), (np.concatenate([p[:, 0], p[:, 1]]), np.concatenate([p[:, 1], p[:, 0]]))),
            shape=(n, n),
        ).tocsr()
        mat.sort_indices()
        return (mat.indptr.astype(np.int64), mat.indices.astype(np.int64), mat.data.astype(np.float64))

    def dense(self) -> np.ndarray:
        a = np.zeros((self.size, self.size))
        a[self.pairs[:, 0], self.pairs[:, 1]] += self.outer
        a += a.T
        a[np.diag_indices(self.size)] = self.inner
        return a


def _as_labels(p) -> np.ndarray:
    return p.assignment if isinstance(p, Partition) else np.asarray(p, dtype=np.int64)


def modularity(obj: Graph | WeightedSuperGraph, partition, t: float = 1.0) -> float:
    """Resolution-scaled modularity ``sum_C [t*in_C/2m - (tot_C/2m)^2]``.

    ``in_C`` counts each internal edge weight twice and includes inner weights;
    ``tot_C`` is the weighted degree of the community.
    """
    sg = obj if isinstance(obj, WeightedSuperGraph) else WeightedSuperGraph.from_graph(obj)
    labels = _as_labels(partition)
    if len(labels) != sg.size:
        raise ValueError("partition does not cover the graph")
    deg = sg.degrees()
    two_m = float(deg.sum())
    if two_m <= 0:
        raise UndefinedModularityError("modularity is undefined for a graph without edge weight")
    k = int(labels.max()) + 1
    tot = np.bincount(labels, deg, minlength=k)
    same = labels[sg.pairs[:, 0]] == labels[sg.pairs[:, 1]]
    inner = np.bincount(labels, sg.inner, minlength=k)
    inner += 2.0 * np.bincount(labels[sg.pairs[same, 0]], sg.outer[same], minlength=k)
    return float(np.sum(t * inner / two_m - (tot / two_m) ** 2))


def _aggregate(indptr, indices, weights, self_w, comm, k):
    rows = np.repeat(np.arange(len(indptr) - 1), np.diff(indptr))
    cr, cc = comm[rows], comm[indices]
    internal = cr == cc
    new_self = np.bincount(comm, self_w, minlength=k) + np.bincount(cr[internal], weights[internal], minlength=k)
    ext = ~internal
    mat = sp.coo_matrix((weights[ext], (cr[ext], cc[ext])), shape=(k, k)).tocsr()
    mat.sort_indices()
    return mat.indptr.astype(np.int64), mat.indices.astype(np.int64), mat.data.astype(np.float64), new_self


def louvain(
    sg: Graph | WeightedSuperGraph,
    t: float = 1.0,
    rng=None,
    tol: float = LOUVAIN_TOL,
    trace: list | None = None,
) -> Partition:
    """Greedy modularity maximization with multilevel aggregation.

    Each level repeats shuffled local-move sweeps until a sweep gains less
    than ``tol``; a level with no move ends the search. Passing ``trace``
    routes the sweeps through the Python kernel and records every move as
    ``(level, node, old, new, gain)`` on the level's super-nodes.
    """
    if t <= 0:
        raise ConfigError("resolution must be positive")
    if isinstance(sg, Graph):
        sg = WeightedSuperGraph.from_graph(sg)
    rng = make_rng(rng)
    n = sg.size
    if n == 0:
        return Partition(np.empty(0, dtype=np.int64))
    deg = sg.degrees()
    m = float(deg.sum()) / 2.0
    if m <= 0:
        return Partition(np.arange(n))

    indptr, indices, weights = sg.csr()
    self_w = sg.inner.copy()
    node_comm = np.arange(n, dtype=np.int64)
    level = 0
    while True:
        k = len(deg)
        comm = np.arange(k, dtype=np.int64)
        comm_tot = deg.astype(np.float64).copy()
        moved = False
        while True:
            order = rng.permutation(k).astype(np.int64)
            if trace is None:
                gain, moves = kernels.louvain_move_pass(
                    indptr, indices, weights, deg, comm, comm_tot, order, float(t), m
                )
            else:
                level_trace: list = []
                gain, moves = _pykernels.louvain_move_pass(
                    indptr, indices, weights, deg, comm, comm_tot, order, float(t), m, trace=level_trace
                )
                trace.extend((level, *mv) for mv in level_trace)
            moved = moved or moves > 0
            if moves == 0 or gain < tol:
                break
        if not moved:
            break
        uniq, comm = np.unique(comm, return_inverse=True)
        comm = comm.astype(np.int64)
        node_comm = comm[node_comm]
        if len(uniq) == k:
            break
        indptr, indices, weights, self_w = _aggregate(indptr, indices, weights, self_w, comm, len(uniq))
        deg = np.bincount(comm, deg, minlength=len(uniq))
        level += 1
    return Partition(node_comm)


def random_partition(g: Graph | int, N: int, rng) -> Partition:
    """Shuffle nodes and cut into blocks of ``N``; the last block may be short."""
    n = g if isinstance(g, int) else g.node_count
    if N < 1:
        raise ConfigError(f"community size N must be >= 1, got {N}")
    rng = make_rng(rng)
    perm = rng.permutation(n)
    labels = np.empty(n, dtype=np.int64)
    labels[perm] = np.arange(n) // N
    return Partition(labels)


def build_weighted_supergraph(g: Graph, p: Partition) -> WeightedSuperGraph:
    """Collapse each community into a super-node; every community pair gets an outer entry."""
    labels = _as_labels(p)
    if len(labels) != g.node_count:
        raise ValueError("partition does not cover the graph")
    k = int(labels.max()) + 1 if len(labels) else 0
    a = labels[g.edges[:, 0]]
    b = labels[g.edges[:, 1]]
    same = a == b
    inner = 2.0 * np.bincount(a[same], minlength=k)
    lo, hi = np.minimum(a[~same], b[~same]), np.maximum(a[~same], b[~same])
    iu, ju = np.triu_indices(k, 1)
    # flat index of (lo, hi) inside the triu ordering
    flat = lo * k - lo * (lo + 1) // 2 + (hi - lo - 1)
    outer = np.bincount(flat, minlength=len(iu)).astype(np.float64)
    return WeightedSuperGraph(inner, np.stack([iu, ju], axis=1), outer)


def perturb_supergraph(sg: WeightedSuperGraph, eps1: float, rng, ledger: PrivacyLedger | None = None) -> WeightedSuperGraph:
    """Laplace-perturb inner and outer weights under one shared budget, then NormSub each vector."""
    rng = make_rng(rng)
    inner = norm_sub(laplace_perturb(sg.inner, SENS_INNER, eps1, rng))
    outer = norm_sub(laplace_perturb(sg.outer, SENS_OUTER, eps1, rng))
    if ledger is not None:
        # inner and outer weights count disjoint edge sets
        ledger.spend(PHASE_INIT, eps1, PARALLEL, "inner weights")
        ledger.spend(PHASE_INIT, eps1, PARALLEL, "outer weights")
    return WeightedSuperGraph(inner, sg.pairs, outer)


def community_initialize(
    g: Graph,
    N: int,
    eps1: float,
    t: float = 1.0,
    rng=None,
    ledger: PrivacyLedger | None = None,
) -> Partition:
    rng = make_rng(rng)
    start = random_partition(g, N, rng)
    noisy = perturb_supergraph(build_weighted_supergraph(g, start), eps1, rng, ledger)
    merged = louvain(noisy, t, rng)
    return Partition(merged.assignment[start.assignment])


def community_adjust(
    g: Graph,
    p: Partition,
    eps2: float,
    rng=None,
    ledger: PrivacyLedger | None = None,
) -> Partition:
    """Reassign every node once, in shuffled order, via the exponential mechanism.

    The quality of a candidate community is the node's edge count into it.
    A community emptied by the removal is no longer a candidate.
    """
    if not eps2 > 0:
        raise InvalidBudgetError(f"privacy budget must be positive, got {eps2!r}")
    rng = make_rng(rng)
    labels = np.array(_as_labels(p), dtype=np.int64)
    n = len(labels)
    if n != g.node_count:
        raise ValueError("partition does not cover the graph")
    k = int(labels.max()) + 1 if n else 0
    sizes = np.bincount(labels, minlength=k)
    indptr, indices = g.csr
    eps_sel = 0.5 * eps2
    for j in rng.permutation(n).tolist():
        old = labels[j]
        sizes[old] -= 1
        conn = np.bincount(labels[indices[indptr[j]:indptr[j + 1]]], minlength=k)
        alive = np.flatnonzero(sizes > 0)
        if alive.size == 0:
            alive = np.array([old])
        choice = int(alive[em_select(conn[alive], SENS_CONNECTION, eps_sel, rng)])
        labels[j] = choice
        sizes[choice] += 1
    if ledger is not None:
        # a differing edge changes the qualities seen by its two endpoints only
        ledger.spend(PHASE_ADJUST, eps_sel, SEQUENTIAL, "EM selection, first endpoint")
        ledger.spend(PHASE_ADJUST, eps_sel, SEQUENTIAL, "EM selection, second endpoint")
    return Partition(labels)
