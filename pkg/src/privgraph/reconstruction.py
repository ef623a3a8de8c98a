"""Graph reconstruction from released statistics, and the end-to-end pipeline."""

from __future__ import annotations

import math

import numpy as np

from .community import community_adjust, community_initialize
from .config import SynthesisConfig
from .dp import (
    PHASE_RECONSTRUCT,
    SEQUENTIAL,
    PrivacyBudget,
    PrivacyLedger,
    enforce,
    make_rng,
)
from .extraction import ExtractedInfo, extract, perturb
from .graph import Graph

_MAX_BLOCK_PAIRS = 4_000_000


def reconstruct_intra(d_hat, members, rng) -> np.ndarray:
    """Chung-Lu edges inside one community.

    Each unordered member pair ``(u, w)`` becomes an edge independently with
    probability ``min(1, d_u * d_w / sum(d))``. Returns global node-id pairs.
    """
    d = np.asarray(d_hat, dtype=np.float64)
    members = np.asarray(members, dtype=np.int64)
    if len(d) != len(members):
        raise ValueError("degree sequence and member list differ in length")
    total = float(d.sum())
    n = len(d)
    if n < 2 or total <= 0:
        return np.empty((0, 2), dtype=np.int64)
    rng = make_rng(rng)
    chunks = []
    if n * (n - 1) // 2 <= _MAX_BLOCK_PAIRS:
        iu, ju = np.triu_indices(n, 1)
        prob = np.minimum(1.0, d[iu] * d[ju] / total)
        hit = rng.random(len(iu)) < prob
        chunks.append(np.stack([iu[hit], ju[hit]], axis=1))
    else:
        for i in range(n - 1):
            prob = np.minimum(1.0, d[i] * d[i + 1:] / total)
            hit = np.flatnonzero(rng.random(n - 1 - i) < prob)
            chunks.append(np.stack([np.full(len(hit), i), hit + i + 1], axis=1))
    local = np.concatenate(chunks) if chunks else np.empty((0, 2), dtype=np.int64)
    return members[local]


def reconstruct_inter(v_hat: float, members_a, members_b, rng, exact_count: bool = False) -> np.ndarray:
    """Edges between two communities with per-pair probability ``min(1, v / (N_a N_b))``.

    The Bernoulli form draws the hit count from the matching binomial and then
    its positions uniformly, which is the same distribution as flipping every
    pair. ``exact_count`` instead places ``v`` edges (stochastically rounded,
    capped at ``N_a N_b``) uniformly without replacement.
    """
    a = np.asarray(members_a, dtype=np.int64)
    b = np.asarray(members_b, dtype=np.int64)
    cells = len(a) * len(b)
    if cells == 0 or not v_hat > 0:
        return np.empty((0, 2), dtype=np.int64)
    rng = make_rng(rng)
    if exact_count:
        base = math.floor(v_hat)
        count = base + int(rng.random() < v_hat - base)
        count = min(count, cells)
    else:
        p = min(1.0, v_hat / cells)
        count = int(rng.binomial(cells, p))
    if count == 0:
        return np.empty((0, 2), dtype=np.int64)
    idx = np.sort(rng.choice(cells, size=count, replace=False))
    return np.stack([a[idx // len(b)], b[idx % len(b)]], axis=1)


def reconstruct(node_count: int, info: ExtractedInfo, rng, exact_count: bool = False) -> Graph:
    rng = make_rng(rng)
    parts = []
    for mem, deg in zip(info.members, info.intra_degrees):
        parts.append(reconstruct_intra(deg, mem, rng))
    for (a, b), v in zip(info.pairs.tolist(), info.inter_counts.tolist()):
        if v > 0:
            parts.append(reconstruct_inter(v, info.members[a], info.members[b], rng, exact_count))
    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    g = Graph(node_count, edges)
    # intra and inter pair domains are disjoint, so nothing may collapse
    assert g.edge_count == len(edges), "duplicate edge across reconstruction blocks"
    return g


def synthesize(
    g: Graph,
    config: SynthesisConfig | None = None,
    budget: PrivacyBudget | None = None,
    rng=None,
) -> tuple[Graph, PrivacyLedger]:
    """Run the three private phases and rebuild a synthetic graph on the same nodes.

    The returned ledger has already passed the accountant; a failing check
    raises :class:`~privgraph.dp.BudgetViolationError`.
    """
    config = config or SynthesisConfig()
    budget = budget or config.budget()
    if rng is None:
        rng = config.seed
    root = make_rng(rng)
    init_rng, adjust_rng, extract_rng, build_rng = root.spawn(4)
    ledger = PrivacyLedger()

    if g.node_count == 0:
        # nothing to release; charge nothing
        ledger.spend(PHASE_RECONSTRUCT, 0.0, SEQUENTIAL, "empty input")
        enforce(budget, ledger)
        return Graph(0), ledger

    prelim = community_initialize(g, config.N, budget.eps1, config.t, init_rng, ledger)
    final = community_adjust(g, prelim, budget.eps2, adjust_rng, ledger)
    info = perturb(extract(g, final), budget.eps3, extract_rng, ledger, scope=config.norm_sub_scope)
    synth = reconstruct(g.node_count, info, build_rng, exact_count=config.inter_sampling == "exact-count")
    ledger.spend(PHASE_RECONSTRUCT, 0.0, SEQUENTIAL, "graph rebuilt from released statistics only")
    enforce(budget, ledger)
    return synth, ledger
