"""Top-m Filter baseline: noisy edge count plus the m largest noisy adjacency cells."""

from __future__ import annotations

import numpy as np

from .dp import SEQUENTIAL, PhaseBudget, PrivacyLedger, _check_eps, enforce, make_rng
from .graph import Graph

PHASE_COUNT = "count"
PHASE_MATRIX = "matrix"

_CHUNK = 1 << 22


class TmFSizeError(ValueError):
    """The upper-triangular cell count exceeds the configured cap."""


def tmf_budget(eps: float, count_fraction: float = 0.1) -> PhaseBudget:
    _check_eps(eps)
    return PhaseBudget({PHASE_COUNT: count_fraction * eps, PHASE_MATRIX: (1 - count_fraction) * eps})


def _row_starts(n: int) -> np.ndarray:
    rows = np.arange(n, dtype=np.int64)
    return rows * n - rows * (rows + 1) // 2


def _flat_index(edges: np.ndarray, n: int) -> np.ndarray:
    u, w = edges[:, 0], edges[:, 1]
    return u * n - u * (u + 1) // 2 + (w - u - 1)


def _unflatten(flat: np.ndarray, n: int) -> np.ndarray:
    starts = _row_starts(n)
    u = np.searchsorted(starts, flat, side="right") - 1
    w = flat - starts[u] + u + 1
    return np.stack([u, w], axis=1)


def _keep_top(vals, keys, idx, m):
    """Top ``m`` by value; ties at the cut go to the smallest random key."""
    if len(vals) <= m:
        return vals, keys, idx
    thr = np.partition(vals, len(vals) - m)[len(vals) - m]
    above = vals > thr
    need = m - int(above.sum())
    at = np.flatnonzero(vals == thr)
    at = at[np.argsort(keys[at], kind="stable")[:need]]
    sel = np.concatenate([np.flatnonzero(above), at])
    return vals[sel], keys[sel], idx[sel]


def tmf_synthesize(
    g: Graph,
    eps: float,
    rng=None,
    count_fraction: float = 0.1,
    max_cells: int = 10**9,
    ledger: PrivacyLedger | None = None,
) -> Graph:
    """Release a graph with exactly ``m~`` edges at the largest noisy cells.

    Cells are streamed in blocks so memory stays at ``O(block + m~)``; the
    result matches a dense materialization with a uniform random tie order.
    """
    budget = tmf_budget(eps, count_fraction)
    eps_c, eps_m = budget.phases[PHASE_COUNT], budget.phases[PHASE_MATRIX]
    n = g.node_count
    cells = n * (n - 1) // 2
    if cells > max_cells:
        raise TmFSizeError(f"{cells} adjacency cells exceed the cap of {max_cells}")
    rng = make_rng(rng)
    led = ledger if ledger is not None else PrivacyLedger()

    m = int(round(g.edge_count + rng.laplace(0.0, 1.0 / eps_c)))
    m = min(max(m, 0), cells)
    led.spend(PHASE_COUNT, eps_c, SEQUENTIAL, "noisy edge count")
    led.spend(PHASE_MATRIX, eps_m, SEQUENTIAL, "noisy adjacency cells")
    enforce(budget, led)
    if m == 0:
        return Graph(n)

    true_flat = np.sort(_flat_index(g.edges, n))
    vals = np.empty(0)
    keys = np.empty(0, dtype=np.uint64)
    idx = np.empty(0, dtype=np.int64)
    for lo in range(0, cells, _CHUNK):
        hi = min(lo + _CHUNK, cells)
        block = rng.laplace(0.0, 1.0 / eps_m, hi - lo)
        a, b = np.searchsorted(true_flat, [lo, hi])
        block[true_flat[a:b] - lo] += 1.0
        block_keys = rng.integers(0, np.iinfo(np.uint64).max, hi - lo, dtype=np.uint64, endpoint=True)
        vals, keys, idx = _keep_top(
            np.concatenate([vals, block]),
            np.concatenate([keys, block_keys]),
            np.concatenate([idx, np.arange(lo, hi, dtype=np.int64)]),
            m,
        )
    return Graph(n, _unflatten(np.sort(idx), n))
