"""Seeded ER, BA and PFP topology generators and topology statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp

from .graph import Graph, GraphError, from_edge_list
from .paths import all_pairs

MODELS = ("er", "ba", "pfp")


@dataclass(frozen=True)
class GeneratorSpec:
    """Parameters for one generator call.

    ``l`` is used by ER, ``m`` by BA and ``p``/``q``/``delta`` by PFP.
    """

    model: str
    n: int
    seed: int = 0
    l: int | None = None
    m: int = 3
    p: float = 0.3
    q: float = 0.1
    delta: float = 0.048

    def __post_init__(self):
        model = self.model.lower()
        object.__setattr__(self, "model", model)
        if model not in MODELS:
            raise GraphError(f"unknown model {self.model!r}; expected one of {MODELS}")
        if self.n < 4:
            raise GraphError("n must be at least 4")
        if model == "er":
            if self.l is None or not 0 < self.l <= self.n * (self.n - 1) // 2:
                raise GraphError(f"ER needs 0 < l <= n(n-1)/2, got l={self.l}")
        elif model == "ba":
            if not 1 <= self.m < self.n:
                raise GraphError(f"BA needs 1 <= m < n, got m={self.m}")
        else:
            if min(self.p, self.q) < 0 or self.p + self.q > 1 or self.delta < 0:
                raise GraphError("PFP needs p, q >= 0, p + q <= 1 and delta >= 0")

    def build(self) -> Graph:
        if self.model == "er":
            return generate_er(self.n, self.l, self.seed)
        if self.model == "ba":
            return generate_ba(self.n, self.m, self.seed)
        return generate_pfp(self.n, self.p, self.q, self.delta, self.seed)


def generate_er(n: int, l: int, seed: int) -> Graph:
    """Exactly ``l`` distinct edges drawn uniformly by rejection sampling."""
    max_l = n * (n - 1) // 2
    if not 0 < l <= max_l:
        raise GraphError(f"cannot place {l} edges on {n} nodes (max {max_l})")
    rng = np.random.default_rng(seed)
    if l > max_l // 2:
        # dense regime: pick pair indices directly
        iu = np.triu_indices(n, k=1)
        pick = np.sort(rng.choice(max_l, size=l, replace=False))
        return from_edge_list(np.column_stack([iu[0][pick], iu[1][pick]]), n=n)
    chosen: set[tuple[int, int]] = set()
    edges = []
    while len(edges) < l:
        batch = rng.integers(0, n, size=(2 * (l - len(edges)) + 16, 2))
        for u, v in batch:
            if u == v:
                continue
            key = (int(u), int(v)) if u < v else (int(v), int(u))
            if key in chosen:
                continue
            chosen.add(key)
            edges.append(key)
            if len(edges) == l:
                break
    return from_edge_list(np.array(edges), n=n)


def generate_ba(n: int, m: int, seed: int) -> Graph:
    """Linear preferential attachment grown from a fully connected seed of ``max(m, 3)`` nodes.

    Each new node links to ``m`` distinct existing nodes chosen with
    probability proportional to degree.
    """
    if not 1 <= m < n:
        raise GraphError(f"BA needs 1 <= m < n, got m={m}")
    m0 = max(m, 3)
    if n < m0:
        raise GraphError(f"n={n} smaller than the seed clique of {m0} nodes")
    rng = np.random.default_rng(seed)
    edges = [(i, j) for i in range(m0) for j in range(i + 1, m0)]
    # every endpoint appears once per incident edge, so a uniform draw is degree-proportional
    ends = [v for e in edges for v in e]
    for new in range(m0, n):
        targets: list[int] = []
        while len(targets) < m:
            v = ends[int(rng.integers(len(ends)))]
            if v not in targets:
                targets.append(v)
        for v in targets:
            edges.append((v, new))
            ends.extend((v, new))
    return from_edge_list(edges, n=n)


class _Fenwick:
    """Prefix-sum tree for weight-proportional sampling with point updates."""

    def __init__(self, size: int):
        self.size = size
        self.tree = [0.0] * (size + 1)
        self.values = [0.0] * size
        self.top = 1 << (size.bit_length())

    def set(self, i: int, value: float) -> None:
        diff = value - self.values[i]
        self.values[i] = value
        j = i + 1
        while j <= self.size:
            self.tree[j] += diff
            j += j & -j

    def total(self) -> float:
        s, j = 0.0, self.size
        while j > 0:
            s += self.tree[j]
            j -= j & -j
        return s

    def find(self, target: float) -> int:
        """Smallest index whose inclusive prefix sum exceeds ``target``."""
        pos, step = 0, self.top
        while step:
            nxt = pos + step
            if nxt <= self.size and self.tree[nxt] <= target:
                pos = nxt
                target -= self.tree[nxt]
            step >>= 1
        return min(pos, self.size - 1)


def pfp_weight(k: int, delta: float) -> float:
    """Nonlinear preference ``k ** (1 + delta * log10 k)``; zero for isolated nodes."""
    if k <= 0:
        return 0.0
    return float(k) ** (1.0 + delta * math.log10(k))


def generate_pfp(
    n: int,
    p: float = 0.3,
    q: float = 0.1,
    delta: float = 0.048,
    seed: int = 0,
    max_retries: int = 50,
) -> Graph:
    """Positive-feedback preference (interactive growth) model.

    Grown from a triangle. Per step, one new node arrives and:

    * with probability ``p`` it links to one host, which gains internal links to two peers;
    * with probability ``q`` it links to one host, which gains an internal link to one peer;
    * otherwise it links to two hosts, one of which gains an internal link to one peer.

    Hosts and peers are drawn without replacement with probability
    proportional to :func:`pfp_weight`. A peer draw that would duplicate an
    existing edge is redrawn up to ``max_retries`` times and then skipped.
    Steps therefore add three links (two in the ``q`` mode), about 2.9 on
    average, short of that only when a host is adjacent to nearly every node.
    """
    if min(p, q) < 0 or p + q > 1 or delta < 0:
        raise GraphError("PFP needs p, q >= 0, p + q <= 1 and delta >= 0")
    if n < 4:
        raise GraphError("n must be at least 4")
    rng = np.random.default_rng(seed)
    adj: list[set[int]] = [set() for _ in range(n)]
    tree = _Fenwick(n)

    def link(u: int, v: int) -> None:
        adj[u].add(v)
        adj[v].add(u)

    def refresh(*nodes: int) -> None:
        for v in nodes:
            tree.set(v, pfp_weight(len(adj[v]), delta))

    def draw(exclude: set[int], arrived: int) -> int | None:
        for _ in range(max_retries):
            v = tree.find(float(rng.random()) * tree.total())
            if v < arrived and v not in exclude:
                return v
        return None

    for u, v in ((0, 1), (1, 2), (0, 2)):
        link(u, v)
    refresh(0, 1, 2)

    for new in range(3, n):
        r = rng.random()
        if r < p:
            n_hosts, n_peers = 1, 2
        elif r < p + q:
            n_hosts, n_peers = 1, 1
        else:
            n_hosts, n_peers = 2, 1
        hosts: list[int] = []
        while len(hosts) < n_hosts:
            h = draw(set(hosts), new)
            if h is not None:
                hosts.append(h)
        # internal links are chosen against the pre-arrival degrees
        host = hosts[0] if n_hosts == 1 else hosts[int(rng.integers(2))]
        peers: list[int] = []
        for _ in range(n_peers):
            peer = draw(adj[host] | {host} | set(peers), new)
            if peer is not None:
                peers.append(peer)
        for h in hosts:
            link(new, h)
        for peer in peers:
            link(host, peer)
        refresh(new, *hosts, *peers)
    edges = [(u, v) for u in range(n) for v in adj[u] if u < v]
    return from_edge_list(edges, n=n)


def avg_shortest_distance(g: Graph) -> float:
    """Mean hop distance over ordered pairs ``s != t``; requires a connected graph."""
    if g.n < 2:
        raise GraphError("need at least two nodes")
    rs = all_pairs(g, low_memory=True)
    total = rs.dist.sum(dtype=np.int64)
    return float(total) / (g.n * (g.n - 1))


def triangles(g: Graph) -> np.ndarray:
    a = sp.csr_matrix((np.ones(g.indices.shape[0]), g.indices, g.indptr), shape=(g.n, g.n))
    return np.asarray((a @ a).multiply(a).sum(axis=1)).ravel() / 2.0


def local_clustering(g: Graph) -> np.ndarray:
    k = g.degrees.astype(float)
    tri = triangles(g)
    out = np.zeros(g.n)
    mask = k >= 2
    out[mask] = 2.0 * tri[mask] / (k[mask] * (k[mask] - 1.0))
    return out


def avg_clustering(g: Graph) -> float:
    """Mean local clustering; nodes with degree below 2 count as zero."""
    return float(local_clustering(g).mean())


def topology_stats(g: Graph) -> dict[str, float]:
    deg = g.degrees
    return {
        "nodes": g.n,
        "links": g.n_edges,
        "max_degree": int(deg.max()),
        "avg_degree": float(deg.mean()),
        "avg_distance": avg_shortest_distance(g),
        "avg_clustering": avg_clustering(g),
    }
