"""Undirected simple graphs, edge-list I/O and basic statistics."""

from __future__ import annotations

import io
from functools import cached_property
from typing import Iterable, Sequence, TextIO

import numpy as np
import scipy.sparse as sp


class ParseError(ValueError):
    """Malformed edge-list input."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class Graph:
    """Immutable undirected simple graph on nodes ``0..node_count-1``.

    Edges are stored once as canonical ``(u, w)`` rows with ``u < w``, sorted
    lexicographically. Self-loops and duplicates are dropped on construction.
    """

    def __init__(self, node_count: int, edges: Iterable[Sequence[int]] | np.ndarray = ()):
        if node_count < 0:
            raise ValueError("node_count must be non-negative")
        if not isinstance(edges, np.ndarray):
            edges = list(edges)
        arr = np.asarray(edges, dtype=np.int64)
        if arr.size == 0:
            arr = np.empty((0, 2), dtype=np.int64)
        arr = arr.reshape(-1, 2)
        if arr.size and (arr.min() < 0 or arr.max() >= node_count):
            raise ValueError("edge endpoint outside [0, node_count)")
        lo = np.minimum(arr[:, 0], arr[:, 1])
        hi = np.maximum(arr[:, 0], arr[:, 1])
        keep = lo != hi
        if keep.any():
            canon = np.unique(np.stack([lo[keep], hi[keep]], axis=1), axis=0)
        else:
            canon = np.empty((0, 2), dtype=np.int64)
        canon.setflags(write=False)
        self._n = int(node_count)
        self._edges = canon

    @property
    def node_count(self) -> int:
        return self._n

    @property
    def edges(self) -> np.ndarray:
        """Read-only ``(E, 2)`` array of canonical edges."""
        return self._edges

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    @cached_property
    def csr(self) -> tuple[np.ndarray, np.ndarray]:
        """Symmetric adjacency as ``(indptr, indices)``; neighbor lists sorted."""
        n = self._n
        if not len(self._edges):
            return np.zeros(n + 1, dtype=np.int64), np.empty(0, dtype=np.int64)
        src = np.concatenate([self._edges[:, 0], self._edges[:, 1]])
        dst = np.concatenate([self._edges[:, 1], self._edges[:, 0]])
        order = np.lexsort((dst, src))
        indices = np.ascontiguousarray(dst[order], dtype=np.int64)
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.cumsum(np.bincount(src, minlength=n), out=indptr[1:])
        indptr.setflags(write=False)
        indices.setflags(write=False)
        return indptr, indices

    @cached_property
    def adjacency_matrix(self) -> sp.csr_matrix:
        indptr, indices = self.csr
        data = np.ones(len(indices), dtype=np.float64)
        return sp.csr_matrix((data, indices, indptr), shape=(self._n, self._n))

    def neighbors(self, u: int) -> np.ndarray:
        indptr, indices = self.csr
        return indices[indptr[u]:indptr[u + 1]]

    def degree(self) -> np.ndarray:
        return degree_sequence(self)

    def edge_set(self) -> set[tuple[int, int]]:
        return {(int(u), int(w)) for u, w in self._edges}

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._n == other._n and np.array_equal(self._edges, other._edges)

    def __hash__(self) -> int:
        return hash((self._n, self._edges.tobytes()))

    def __repr__(self) -> str:
        return f"Graph(node_count={self._n}, edge_count={self.edge_count})"


def degree_sequence(g: Graph) -> np.ndarray:
    """Per-node degree; sums to ``2 * edge_count``."""
    return np.bincount(g.edges.ravel(), minlength=g.node_count).astype(np.int64)


def _fresh_label(i: int, used: set[str]) -> str:
    label = str(i)
    while label in used:
        label = "_" + label
    return label


def parse_edge_list(
    text: str | TextIO,
    known_labels: Sequence[str] | None = None,
) -> tuple[Graph, list[str]]:
    """Parse a whitespace-separated edge list.

    Lines starting with ``#`` are comments. An optional first data line
    ``n=<count>`` declares the node count so isolated nodes survive a round
    trip; nodes never named in an edge receive generated labels.

    Labels are re-indexed densely in first-appearance order. With
    ``known_labels`` the ids follow that list instead and an unknown label is
    a parse error; this aligns a synthetic file with its original.
    """
    stream = io.StringIO(text) if isinstance(text, str) else text
    if known_labels is not None:
        labels = list(known_labels)
        index = {lab: i for i, lab in enumerate(labels)}
    else:
        labels, index = [], {}
    declared: int | None = None
    pairs: list[tuple[int, int]] = []
    seen_data = False

    for lineno, raw in enumerate(stream, start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if not seen_data and line.startswith("n="):
            try:
                declared = int(line[2:])
            except ValueError:
                raise ParseError(f"bad node-count header {line!r}", lineno) from None
            if declared < 0:
                raise ParseError("negative node count", lineno)
            seen_data = True
            continue
        seen_data = True
        tokens = line.split()
        if len(tokens) != 2:
            raise ParseError(f"expected 2 tokens, got {len(tokens)}", lineno)
        ids = []
        for tok in tokens:
            idx = index.get(tok)
            if idx is None:
                if known_labels is not None:
                    raise ParseError(f"unknown node label {tok!r}", lineno)
                idx = len(labels)
                index[tok] = idx
                labels.append(tok)
            ids.append(idx)
        pairs.append((ids[0], ids[1]))

    if known_labels is not None:
        n = len(labels)
        if declared is not None and declared != n:
            raise ParseError(f"header declares {declared} nodes, expected {n}")
    else:
        n = len(labels)
        if declared is not None:
            if declared < n:
                raise ParseError(f"header declares {declared} nodes but {n} labels appear")
            used = set(labels)
            for i in range(n, declared):
                lab = _fresh_label(i, used)
                used.add(lab)
                labels.append(lab)
            n = declared
    return Graph(n, pairs), labels


def read_edge_list(path, known_labels: Sequence[str] | None = None) -> tuple[Graph, list[str]]:
    with open(path, encoding="utf-8") as fh:
        return parse_edge_list(fh, known_labels=known_labels)


def write_edge_list(g: Graph, labels: Sequence[str] | None = None) -> str:
    """Serialize ``g``; a ``n=<count>`` header is emitted only when isolated nodes exist."""
    if labels is None:
        labels = [str(i) for i in range(g.node_count)]
    elif len(labels) != g.node_count:
        raise ValueError("label map size does not match node count")
    out = []
    if g.node_count and (degree_sequence(g) == 0).any():
        out.append(f"n={g.node_count}\n")
    out.extend(f"{labels[u]} {labels[w]}\n" for u, w in g.edges.tolist())
    return "".join(out)


def from_networkx(nxg) -> tuple[Graph, list[str]]:
    """Convenience bridge for tests and notebooks."""
    nodes = list(nxg.nodes())
    index = {v: i for i, v in enumerate(nodes)}
    edges = [(index[u], index[w]) for u, w in nxg.edges()]
    return Graph(len(nodes), edges), [str(v) for v in nodes]
