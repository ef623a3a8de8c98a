"""Utility metrics comparing an original graph with a synthetic one."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.sparse.csgraph import connected_components, shortest_path

from . import kernels
from .community import Partition, UndefinedModularityError, _as_labels, louvain, modularity
from .dp import make_rng
from .graph import Graph, degree_sequence

DELTA = 1e-9
KL_SMOOTHING = 1e-9
EVC_TOL = 1e-10
EVC_MAX_ITER = 10_000
EXACT_DIAMETER_LIMIT = 10_000

CSV_COLUMNS = ("nmi", "evc_overlap", "evc_mae", "degree_kl", "diameter_re", "cc_re", "modularity_re")


def relative_error(estimate: float, truth: float, delta: float = DELTA) -> float:
    return abs(estimate - truth) / max(delta, truth)


def nmi(a, b) -> float:
    """Normalized mutual information from the contingency table, natural log.

    When both partitions are a single block the ratio is 0/0; it is taken as
    1 for identical partitions and 0 otherwise.
    """
    la, lb = _as_labels(a), _as_labels(b)
    if len(la) != len(lb):
        raise ValueError("partitions cover different node sets")
    n = len(la)
    if n == 0:
        return 1.0
    _, ia = np.unique(la, return_inverse=True)
    _, ib = np.unique(lb, return_inverse=True)
    h = sp.coo_matrix((np.ones(n), (ia, ib))).tocsr()
    h.sum_duplicates()
    x = np.asarray(h.sum(axis=1)).ravel()
    y = np.asarray(h.sum(axis=0)).ravel()
    rows, cols = h.nonzero()
    if len(rows) == len(x) == len(y):
        # same partition up to relabeling; the ratio is exactly one
        return 1.0
    hij = np.asarray(h[rows, cols]).ravel()
    num = -2.0 * np.sum(hij * np.log(hij * n / (x[rows] * y[cols])))
    den = np.sum(x * np.log(x / n)) + np.sum(y * np.log(y / n))
    if den == 0:
        return 1.0 if np.array_equal(ia, ib) else 0.0
    return float(min(1.0, max(0.0, num / den)))


def eigenvector_centrality(g: Graph, tol: float = EVC_TOL, max_iter: int = EVC_MAX_ITER) -> tuple[np.ndarray, bool]:
    """Principal eigenvector by power iteration, L2-normalized.

    Iterates on ``A + I`` from a uniform start: same eigenvectors as ``A``,
    but bipartite components cannot make the iteration oscillate. Returns
    ``(scores, converged)``; on non-convergence the last iterate is returned.
    """
    n = g.node_count
    if n == 0:
        return np.empty(0), True
    a = g.adjacency_matrix
    x = np.full(n, 1.0 / math.sqrt(n))
    for _ in range(max_iter):
        nxt = a @ x + x
        norm = np.linalg.norm(nxt)
        nxt /= norm
        if np.abs(nxt - x).max() < tol:
            return nxt, True
        x = nxt
    return x, False


def _top_k(scores: np.ndarray, k: int) -> np.ndarray:
    # stable on ties: lower node id ranks first
    return np.lexsort((np.arange(len(scores)), -scores))[:k]


def evc_topk(g_orig: Graph, g_syn: Graph, fraction: float = 0.01) -> tuple[float, float, bool]:
    """Top-fraction overlap and rank-aligned MAE; third value flags convergence."""
    if g_orig.node_count == 0 or g_syn.node_count == 0:
        raise ValueError("eigenvector centrality needs non-empty graphs")
    s, ok1 = eigenvector_centrality(g_orig)
    s_hat, ok2 = eigenvector_centrality(g_syn)
    k = max(1, int(math.floor(fraction * g_orig.node_count)))
    top, top_hat = _top_k(s, k), _top_k(s_hat, k)
    overlap = len(set(top.tolist()) & set(top_hat.tolist())) / k
    mae = float(np.mean(np.abs(s_hat[top_hat] - s[top])))
    return overlap, mae, ok1 and ok2


def degree_distribution(g: Graph) -> np.ndarray:
    deg = degree_sequence(g)
    if len(deg) == 0:
        return np.empty(0)
    return np.bincount(deg) / len(deg)


def degree_kl(g_orig: Graph, g_syn: Graph, smoothing: float = KL_SMOOTHING) -> float:
    p = degree_distribution(g_orig)
    q = degree_distribution(g_syn)
    if len(p) == 0 or len(q) == 0:
        raise ValueError("degree distribution of an empty graph")
    width = max(len(p), len(q))
    p = np.pad(p, (0, width - len(p)))
    q = np.pad(q, (0, width - len(q)))
    if np.array_equal(p, q):
        # smoothing only P-hat would leave O(eps^2) roundoff here
        return 0.0
    support = (p > 0) | (q > 0)
    q = np.where(support, q + smoothing, 0.0)
    q /= q.sum()
    on = p > 0
    return float(max(0.0, np.sum(p[on] * np.log(p[on] / q[on]))))


def largest_component(g: Graph) -> np.ndarray:
    if g.node_count == 0:
        return np.empty(0, dtype=np.int64)
    _, labels = connected_components(g.adjacency_matrix, directed=False)
    sizes = np.bincount(labels)
    return np.flatnonzero(labels == int(np.argmax(sizes)))


def diameter(g: Graph, exact_limit: int = EXACT_DIAMETER_LIMIT) -> tuple[int, bool]:
    """Largest eccentricity within the largest connected component.

    Exact up to ``exact_limit`` component nodes; above it a double sweep
    gives a lower bound and the second value is ``False``.
    """
    if g.edge_count == 0:
        return 0, True
    indptr, indices = g.csr
    lcc = largest_component(g)
    if len(lcc) <= exact_limit:
        ecc = kernels.bfs_eccentricities(indptr, indices, lcc.astype(np.int64))
        return int(ecc.max()), True
    start = int(lcc[0])
    for _ in range(2):
        dist = shortest_path(g.adjacency_matrix, unweighted=True, indices=start, directed=False)
        dist[~np.isfinite(dist)] = -1
        start = int(np.argmax(dist))
    return int(dist.max()), False


def diameter_re(g_orig: Graph, g_syn: Graph) -> float:
    return relative_error(diameter(g_syn)[0], diameter(g_orig)[0])


def triangle_count(g: Graph) -> int:
    indptr, indices = g.csr
    return int(kernels.count_triangles(indptr, indices))


def clustering_coefficient(g: Graph, variant: str = "global") -> float:
    """Transitivity ``3*triangles/connected triplets`` or the mean local coefficient."""
    deg = degree_sequence(g).astype(np.float64)
    if variant == "global":
        triplets = float(np.sum(deg * (deg - 1) / 2))
        if triplets == 0:
            return 0.0
        return 3.0 * triangle_count(g) / triplets
    if variant == "average":
        if g.node_count == 0:
            return 0.0
        a = g.adjacency_matrix
        tri = np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2
        pairs = deg * (deg - 1) / 2
        local = np.divide(tri, pairs, out=np.zeros_like(tri), where=pairs > 0)
        return float(local.mean())
    raise ValueError(f"unknown clustering variant {variant!r}")


def clustering_re(g_orig: Graph, g_syn: Graph, variant: str = "global") -> float:
    return relative_error(clustering_coefficient(g_syn, variant), clustering_coefficient(g_orig, variant))


def louvain_modularity(g: Graph, rng=None) -> tuple[Partition, float]:
    if g.edge_count == 0:
        raise UndefinedModularityError("modularity is undefined for an edgeless graph")
    part = louvain(g, 1.0, make_rng(rng))
    return part, modularity(g, part)


def modularity_re(g_orig: Graph, g_syn: Graph, rng=None) -> float:
    # separate generators from one seed keep (g, g) comparisons exact
    seed = rng if isinstance(rng, (int, np.integer)) or rng is None else int(make_rng(rng).integers(2**63))
    _, q = louvain_modularity(g_orig, seed)
    _, q_hat = louvain_modularity(g_syn, seed)
    return relative_error(q_hat, q)


@dataclass
class MetricsReport:
    nmi: float
    evc_overlap: float
    evc_mae: float
    degree_kl: float
    diameter_re: float
    cc_re: float
    modularity_re: float
    flags: dict = field(default_factory=dict)

    def values(self) -> list[float]:
        return [getattr(self, c) for c in CSV_COLUMNS]

    def to_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(CSV_COLUMNS)
        w.writerow([repr(float(v)) for v in self.values()])
        return buf.getvalue()


def evaluate(g_orig: Graph, g_syn: Graph, seed: int = 0, clustering: str = "global") -> MetricsReport:
    """All seven metrics. Both graphs get their own Louvain run from ``seed``."""
    if g_orig.node_count != g_syn.node_count:
        raise ValueError(f"node sets differ: {g_orig.node_count} vs {g_syn.node_count} nodes")
    part, q = louvain_modularity(g_orig, seed)
    part_hat, q_hat = louvain_modularity(g_syn, seed)
    overlap, mae, evc_ok = evc_topk(g_orig, g_syn)
    d, d_exact = diameter(g_orig)
    d_hat, d_hat_exact = diameter(g_syn)
    return MetricsReport(
        nmi=nmi(part, part_hat),
        evc_overlap=overlap,
        evc_mae=mae,
        degree_kl=degree_kl(g_orig, g_syn),
        diameter_re=relative_error(d_hat, d),
        cc_re=clustering_re(g_orig, g_syn, clustering),
        modularity_re=relative_error(q_hat, q),
        flags={
            "evc_converged": evc_ok,
            "diameter_exact": d_exact and d_hat_exact,
            "clustering": clustering,
        },
    )
