"""Unweighted shortest-path state, betweenness, and next-hop enumeration.

Betweenness follows the traffic-model endpoint convention: node ``i`` is
credited with its fractional share of every ordered pair ``(s, t)`` for which
it is an interior node of the shortest paths, plus ``N - 1`` for its role as a
source when ``count_source`` is set (a source spends capability on each packet
it emits, a destination never does). With the source term ``B(i) >= N - 1``
and ``sum(B) = N (N - 1) * mean shortest distance``; without it the sum is
``N (N - 1) * (mean shortest distance - 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numba
import numpy as np

from .graph import Graph

UNREACHED = np.iinfo(np.uint16).max
SIGMA_MAX = np.iinfo(np.uint64).max
# dist (uint16) + sigma (uint64) per node pair
_BYTES_PER_PAIR = 10
DEFAULT_MEMORY_BUDGET = 2 * 1024**3


class RoutingError(RuntimeError):
    pass


@numba.njit(cache=True)
def _bfs_column(indptr, indices, t, dist, sigma, queue):
    """BFS from ``t`` filling ``dist[i] = d(i, t)`` and saturating ``sigma[i] = sigma(i -> t)``."""
    n = indptr.shape[0] - 1
    for i in range(n):
        dist[i] = UNREACHED
        sigma[i] = 0
    dist[t] = 0
    sigma[t] = 1
    queue[0] = t
    head = 0
    tail = 1
    saturated = False
    while head < tail:
        u = queue[head]
        head += 1
        du = dist[u]
        for p in range(indptr[u], indptr[u + 1]):
            v = indices[p]
            if dist[v] == UNREACHED:
                dist[v] = du + 1
                queue[tail] = v
                tail += 1
            if dist[v] == du + 1:
                if sigma[v] > SIGMA_MAX - sigma[u]:
                    sigma[v] = SIGMA_MAX
                    saturated = True
                else:
                    sigma[v] += sigma[u]
    return tail, saturated


@numba.njit(cache=True)
def _all_pairs(indptr, indices, dist, sigma, with_sigma):
    n = indptr.shape[0] - 1
    queue = np.empty(n, dtype=np.int32)
    scratch = np.empty(n, dtype=np.uint64)
    reached_all = True
    saturated = False
    for t in range(n):
        if with_sigma:
            reached, sat = _bfs_column(indptr, indices, t, dist[t], sigma[t], queue)
        else:
            reached, sat = _bfs_column(indptr, indices, t, dist[t], scratch, queue)
        saturated |= sat
        if reached != n:
            reached_all = False
    return reached_all, saturated


@numba.njit(cache=True)
def _brandes(indptr, indices):
    """Interior-node fractional betweenness summed over ordered pairs.

    Sources are processed in ascending id order so the float accumulation is
    reproducible.
    """
    n = indptr.shape[0] - 1
    bc = np.zeros(n, dtype=np.float64)
    dist = np.empty(n, dtype=np.int64)
    sigma = np.empty(n, dtype=np.float64)
    delta = np.empty(n, dtype=np.float64)
    order = np.empty(n, dtype=np.int32)
    ok = True
    for s in range(n):
        for i in range(n):
            dist[i] = -1
            sigma[i] = 0.0
            delta[i] = 0.0
        dist[s] = 0
        sigma[s] = 1.0
        order[0] = s
        head = 0
        tail = 1
        while head < tail:
            u = order[head]
            head += 1
            for p in range(indptr[u], indptr[u + 1]):
                v = indices[p]
                if dist[v] < 0:
                    dist[v] = dist[u] + 1
                    order[tail] = v
                    tail += 1
                if dist[v] == dist[u] + 1:
                    sigma[v] += sigma[u]
        if tail != n:
            ok = False
        for k in range(tail - 1, 0, -1):
            w = order[k]
            coeff = (1.0 + delta[w]) / sigma[w]
            for p in range(indptr[w], indptr[w + 1]):
                v = indices[p]
                if dist[v] == dist[w] - 1:
                    delta[v] += sigma[v] * coeff
            bc[w] += delta[w]
    return bc, ok


def bfs_from(g: Graph, t: int) -> tuple[np.ndarray, np.ndarray]:
    """Distances ``d(., t)`` and path counts ``sigma(. -> t)`` toward destination ``t``."""
    if not 0 <= t < g.n:
        raise RoutingError(f"node {t} out of range")
    dist = np.empty(g.n, dtype=np.uint16)
    sigma = np.empty(g.n, dtype=np.uint64)
    queue = np.empty(g.n, dtype=np.int32)
    reached, _ = _bfs_column(g.indptr, g.indices, t, dist, sigma, queue)
    if reached != g.n:
        missing = int(np.flatnonzero(dist == UNREACHED)[0])
        raise RoutingError(f"node {missing} cannot reach {t}; reduce to the largest connected component first")
    return dist, sigma


@dataclass(frozen=True, eq=False)
class RoutingState:
    """All-pairs hop counts and shortest-path counts.

    Row ``t`` of each matrix is the column toward destination ``t``:
    ``dist[t, i] = d(i, t)`` and ``sigma[t, i] = sigma(i -> t)``. Both are
    symmetric for undirected graphs. ``sigma`` is ``None`` in low-memory mode,
    in which case next hops are weighted uniformly.
    """

    dist: np.ndarray
    sigma: np.ndarray | None
    saturated: bool = False
    _cache: dict = field(default_factory=dict, repr=False)

    @property
    def n(self) -> int:
        return int(self.dist.shape[0])

    @property
    def weighted(self) -> bool:
        return self.sigma is not None


def all_pairs(g: Graph, low_memory: bool = False, memory_budget: int = DEFAULT_MEMORY_BUDGET) -> RoutingState:
    per_pair = 2 if low_memory else _BYTES_PER_PAIR
    need = per_pair * g.n * g.n
    if need > memory_budget:
        hint = "" if low_memory else "; retry with low_memory=True (uniform next-hop weights)"
        raise RoutingError(
            f"routing state for n={g.n} needs {need / 2**20:.0f} MiB, budget is {memory_budget / 2**20:.0f} MiB{hint}"
        )
    dist = np.empty((g.n, g.n), dtype=np.uint16)
    sigma = None if low_memory else np.empty((g.n, g.n), dtype=np.uint64)
    dummy = np.empty((1, 1), dtype=np.uint64)
    ok, saturated = _all_pairs(g.indptr, g.indices, dist, dummy if sigma is None else sigma, not low_memory)
    if not ok:
        raise RoutingError("graph is disconnected; reduce to the largest connected component first")
    dist.setflags(write=False)
    if sigma is not None:
        sigma.setflags(write=False)
    return RoutingState(dist=dist, sigma=sigma, saturated=bool(saturated))


def betweenness(g: Graph, count_source: bool = True) -> np.ndarray:
    """Destination-exclusive betweenness ``B(i)`` over ordered pairs.

    ``count_source=False`` gives plain interior betweenness, matching a
    simulator in which sources do not spend capability on their own packets.
    """
    interior, ok = _brandes(g.indptr, g.indices)
    if not ok:
        raise RoutingError("graph is disconnected; reduce to the largest connected component first")
    return interior + (g.n - 1) if count_source else interior


def successors(rs: RoutingState, g: Graph, i: int, t: int) -> list[tuple[int, int]]:
    """Next hops from ``i`` toward ``t`` with their path-count weights ``sigma(j -> t)``.

    In low-memory mode every next hop has weight 1.
    """
    if i == t:
        raise RoutingError("no next hop: node is the destination")
    d = rs.dist[t]
    nbrs = g.neighbors(i)
    hops = nbrs[d[nbrs] == d[i] - 1]
    if rs.sigma is None:
        return [(int(j), 1) for j in hops]
    return [(int(j), int(rs.sigma[t, j])) for j in hops]


def b_plus_by_degree(g: Graph, b: np.ndarray) -> dict[int, float]:
    """Largest betweenness among nodes of each degree present in ``g``."""
    deg = g.degrees
    out: dict[int, float] = {}
    for k in np.unique(deg):
        out[int(k)] = float(b[deg == k].max())
    return out


def degree_counts(g: Graph) -> dict[int, int]:
    ks, counts = np.unique(g.degrees, return_counts=True)
    return {int(k): int(c) for k, c in zip(ks, counts)}
