"""Intra-community degree sequences and inter-community edge counts, with their noisy release."""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .community import Partition, _as_labels
from .dp import (
    PARALLEL,
    PHASE_EXTRACT,
    SENS_DEGREE,
    SENS_EDGE_VECTOR,
    PrivacyLedger,
    laplace_perturb,
    make_rng,
    norm_sub,
)
from .graph import Graph

TRUE, NOISY, CALIBRATED = "true", "noisy", "calibrated"
GLOBAL, PER_COMMUNITY = "global", "per-community"


@dataclass(frozen=True)
class ExtractedInfo:
    """Per-community degree sequences plus the community-pair edge-count vector.

    ``intra_degrees[a][i]`` belongs to node ``members[a][i]``. ``pairs`` lists
    every unordered community pair ``(a, b)``, ``a < b``, in row-major order
    and ``inter_counts`` is aligned with it.
    """

    members: list[np.ndarray]
    intra_degrees: list[np.ndarray]
    pairs: np.ndarray
    inter_counts: np.ndarray
    variant: str = TRUE

    @property
    def community_count(self) -> int:
        return len(self.members)

    def flat_degrees(self) -> np.ndarray:
        if not self.intra_degrees:
            return np.empty(0)
        return np.concatenate(self.intra_degrees).astype(np.float64)

    def with_degrees(self, flat: np.ndarray, inter: np.ndarray, variant: str) -> "ExtractedInfo":
        bounds = np.cumsum([len(m) for m in self.members])[:-1]
        degrees = np.split(np.asarray(flat, dtype=np.float64), bounds) if self.members else []
        return replace(self, intra_degrees=degrees, inter_counts=np.asarray(inter, dtype=np.float64), variant=variant)

    def to_json(self, labels=None, allow_true: bool = False) -> str:
        """Debug dump. The true variant is raw private data and needs ``allow_true``."""
        if self.variant == TRUE and not allow_true:
            raise PermissionError("refusing to dump un-noised extraction without allow_true=True")

        def name(u):
            return labels[u] if labels is not None else int(u)

        doc = {
            "variant": self.variant,
            "communities": [
                {"members": [name(u) for u in mem.tolist()], "degrees": deg.tolist()}
                for mem, deg in zip(self.members, self.intra_degrees)
            ],
            "inter_counts": [
                {"a": int(a), "b": int(b), "count": float(c)}
                for (a, b), c in zip(self.pairs.tolist(), self.inter_counts.tolist())
            ],
        }
        return json.dumps(doc, indent=2)


def extract(g: Graph, p: Partition) -> ExtractedInfo:
    labels = _as_labels(p)
    if len(labels) != g.node_count:
        raise ValueError("partition does not cover the graph")
    part = p if isinstance(p, Partition) else Partition(labels)
    labels = part.assignment
    k = part.community_count
    a = labels[g.edges[:, 0]]
    b = labels[g.edges[:, 1]]
    same = a == b
    internal = g.edges[same]
    deg_in = np.bincount(internal.ravel(), minlength=g.node_count)
    members = part.members
    degrees = [deg_in[mem].astype(np.int64) for mem in members]

    iu, ju = np.triu_indices(k, 1)
    lo, hi = np.minimum(a[~same], b[~same]), np.maximum(a[~same], b[~same])
    flat = lo * k - lo * (lo + 1) // 2 + (hi - lo - 1)
    inter = np.bincount(flat, minlength=len(iu)).astype(np.int64)
    return ExtractedInfo(members, degrees, np.stack([iu, ju], axis=1), inter, TRUE)


def perturb(
    info: ExtractedInfo,
    eps3: float,
    rng=None,
    ledger: PrivacyLedger | None = None,
    scope: str = GLOBAL,
) -> ExtractedInfo:
    """Release degrees and inter counts under one shared budget (they cover disjoint edges).

    ``scope`` picks whether NormSub runs once over all degrees (``global``) or
    once per community (``per-community``).
    """
    if scope not in (GLOBAL, PER_COMMUNITY):
        raise ValueError(f"unknown NormSub scope {scope!r}")
    rng = make_rng(rng)
    noisy_d = laplace_perturb(info.flat_degrees(), SENS_DEGREE, eps3, rng)
    noisy_v = laplace_perturb(info.inter_counts, SENS_EDGE_VECTOR, eps3, rng)
    if scope == GLOBAL:
        d_hat = norm_sub(noisy_d)
    else:
        bounds = np.cumsum([len(m) for m in info.members])[:-1]
        chunks = np.split(noisy_d, bounds) if info.members else []
        d_hat = np.concatenate([norm_sub(c) for c in chunks]) if chunks else noisy_d
    v_hat = norm_sub(noisy_v)
    if ledger is not None:
        ledger.spend(PHASE_EXTRACT, eps3, PARALLEL, "intra-community degree sequence")
        ledger.spend(PHASE_EXTRACT, eps3, PARALLEL, "inter-community edge vector")
    return info.with_degrees(d_hat, v_hat, CALIBRATED)
