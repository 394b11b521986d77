"""Immutable simple undirected graphs in compressed (offset/neighbor) layout."""

from __future__ import annotations

import os
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable

import numpy as np

from ._io import atomic_write_text


class GraphError(ValueError):
    """Raised for malformed graph input or invalid node references."""


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple undirected graph on nodes ``0..n-1``.

    ``indptr``/``indices`` hold the adjacency in CSR form with each neighbor
    list sorted ascending. ``edges`` is the canonical ``(L, 2)`` array with
    ``u < v`` rows in lexicographic order.
    """

    n: int
    edges: np.ndarray
    indptr: np.ndarray = field(repr=False)
    indices: np.ndarray = field(repr=False)

    @property
    def n_edges(self) -> int:
        return int(self.edges.shape[0])

    @property
    def degrees(self) -> np.ndarray:
        return np.diff(self.indptr)

    def degree(self, i: int) -> int:
        if not 0 <= i < self.n:
            raise GraphError(f"node {i} out of range for graph with {self.n} nodes")
        return int(self.indptr[i + 1] - self.indptr[i])

    def neighbors(self, i: int) -> np.ndarray:
        if not 0 <= i < self.n:
            raise GraphError(f"node {i} out of range for graph with {self.n} nodes")
        return self.indices[self.indptr[i] : self.indptr[i + 1]]

    def to_edge_list(self) -> list[tuple[int, int]]:
        return [(int(u), int(v)) for u, v in self.edges]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self.n == other.n and np.array_equal(self.edges, other.edges)

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, edges={self.n_edges})"


def _build(n: int, edges: np.ndarray) -> Graph:
    """Assemble a Graph from canonical (u < v, sorted, unique) edges."""
    edges = np.ascontiguousarray(edges, dtype=np.int64).reshape(-1, 2)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int32)
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    edges.setflags(write=False)
    indices.setflags(write=False)
    indptr.setflags(write=False)
    return Graph(n=n, edges=edges, indptr=indptr, indices=indices)


def from_edge_list(pairs: Iterable[tuple[int, int]] | np.ndarray, n: int | None = None) -> Graph:
    """Build a simple graph from node pairs.

    Duplicate pairs (in either orientation) and self-loops are dropped. The
    node count is ``1 + max index`` unless ``n`` is given explicitly, which
    allows trailing isolated nodes.
    """
    arr = np.asarray(list(pairs) if not isinstance(pairs, np.ndarray) else pairs, dtype=np.int64)
    if arr.size == 0:
        raise GraphError("empty graph")
    arr = arr.reshape(-1, 2)
    if arr.min() < 0:
        raise GraphError("node indices must be non-negative")
    n_ref = int(arr.max()) + 1
    if n is None:
        n = n_ref
    elif n < n_ref:
        raise GraphError(f"edge references node {n_ref - 1} but n={n}")
    arr = np.sort(arr, axis=1)
    arr = arr[arr[:, 0] != arr[:, 1]]
    arr = np.unique(arr, axis=0)
    return _build(n, arr)


def largest_connected_component(g: Graph) -> tuple[Graph, np.ndarray]:
    """Return the induced subgraph on the largest component, relabeled densely.

    The second value maps old ids to new ids, with ``-1`` for dropped nodes.
    Ties between equally large components go to the one holding the smallest
    node id.
    """
    labels = component_labels(g)
    sizes = np.bincount(labels)
    keep = labels == int(np.argmax(sizes))
    mapping = np.full(g.n, -1, dtype=np.int64)
    mapping[keep] = np.arange(int(keep.sum()))
    if keep.all():
        return g, mapping
    e = g.edges
    sel = keep[e[:, 0]]
    return _build(int(keep.sum()), mapping[e[sel]]), mapping


def component_labels(g: Graph) -> np.ndarray:
    labels = np.full(g.n, -1, dtype=np.int64)
    comp = 0
    for s in range(g.n):
        if labels[s] >= 0:
            continue
        labels[s] = comp
        queue = deque([s])
        while queue:
            u = queue.popleft()
            for v in g.indices[g.indptr[u] : g.indptr[u + 1]]:
                if labels[v] < 0:
                    labels[v] = comp
                    queue.append(v)
        comp += 1
    return labels


def is_connected(g: Graph) -> bool:
    return g.n > 0 and int(component_labels(g).max()) == 0


def read_edge_list(path: str | os.PathLike) -> Graph:
    """Read whitespace-separated node pairs, one edge per line; ``#`` starts a comment line."""
    path = Path(path)
    pairs = []
    with path.open() as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            if len(parts) < 2:
                raise GraphError(f"{path}:{lineno}: expected two node ids, got {line!r}")
            try:
                pairs.append((int(parts[0]), int(parts[1])))
            except ValueError as exc:
                raise GraphError(f"{path}:{lineno}: {exc}") from None
    return from_edge_list(pairs)


def write_edge_list(g: Graph, path: str | os.PathLike, header: str | None = None) -> None:
    lines = []
    if header:
        lines.extend(f"# {h}" for h in header.splitlines())
    lines.extend(f"{u} {v}" for u, v in g.edges)
    atomic_write_text(path, "\n".join(lines) + "\n")
