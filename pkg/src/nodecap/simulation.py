"""Packet-level traffic-flow model with capability-limited FIFO nodes.

Each step runs, in order:

1. packets forwarded during the previous step join their next hop's queue;
2. ``lam`` packets are created, each at a uniform random source with a
   uniform random destination different from the source, appended to the
   source's queue (or, when sources do not pay for their own traffic, sent
   straight on to the first hop, arriving there next step);
3. every node ``i`` (ascending id) has budget ``C_i + credit_i`` and forwards
   up to ``floor(budget)`` packets from the head of its queue. Each goes to a
   next hop on a shortest path, sampled with weight ``sigma(j -> t)`` so the
   route is uniform over all shortest paths. A packet whose next hop is its
   destination is delivered and removed. The credit keeps the fractional part
   of the budget, so node ``i`` forwards at long-run rate ``C_i``;
4. ``theta[t]`` records the packets still in the network.

Randomness comes from one :class:`numpy.random.Generator` (PCG64, seeded
through ``numpy.random.default_rng(seed)``) consumed only through
``random()`` in this order: source then destination (redrawn while equal to
the source) for each created packet, then one draw per forwarded packet that
has more than one candidate next hop. When sources do not pay, the first-hop
draw of a created packet directly follows its destination draw. Integers are
``floor(u * n)``. A next-hop draw ``u`` picks the first candidate, in
ascending node id, whose cumulative share ``floor(share * 2**30)`` exceeds
``floor(u * 2**30)``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numba
import numpy as np

from .graph import Graph
from .paths import RoutingState

DEFAULT_STEPS = 5000
DEFAULT_TRANSIENT = 1000
DEFAULT_WINDOW = 100
_SCALE = 2**30


class SimulationError(ValueError):
    pass


@dataclass(frozen=True)
class SimConfig:
    lam: int
    steps: int = DEFAULT_STEPS
    transient: int = DEFAULT_TRANSIENT
    window: int = DEFAULT_WINDOW
    seed: int = 0

    def __post_init__(self):
        if self.lam < 1:
            raise SimulationError(f"lambda must be a positive integer, got {self.lam}")
        if self.transient < 1 or self.window < 1:
            raise SimulationError("transient and window must be at least 1")
        if self.steps - self.transient < self.window:
            raise SimulationError("need steps - transient >= window")


@dataclass
class SimResult:
    theta: np.ndarray
    eta: float
    eta_raw: float
    created: int
    delivered: int
    steps_run: int
    conserved: bool | None = None

    @property
    def in_flight(self) -> int:
        return int(self.theta[-1]) if self.theta.size else 0


@numba.njit(cache=True)
def _count_multi(indptr, indices, dist):
    n = indptr.shape[0] - 1
    total = 0
    for i in range(n):
        for t in range(n):
            if t == i:
                continue
            want = dist[i, t] - 1
            m = 0
            for p in range(indptr[i], indptr[i + 1]):
                if dist[indices[p], t] == want:
                    m += 1
            if m > 1:
                total += m
    return total


@numba.njit(cache=True)
def _fill_table(indptr, indices, dist, sigma, weighted, first, cand):
    n = indptr.shape[0] - 1
    pos = 0
    for i in range(n):
        for t in range(n):
            if t == i:
                first[i * n + t] = i
                continue
            want = dist[i, t] - 1
            m = 0
            last = -1
            for p in range(indptr[i], indptr[i + 1]):
                if dist[indices[p], t] == want:
                    m += 1
                    last = indices[p]
            if m == 1:
                first[i * n + t] = last
                continue
            first[i * n + t] = -(pos + 1)
            tot = 0.0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if dist[j, t] == want:
                    # sigma is symmetric, so sigma(j -> t) also sits at [j, t]
                    tot += float(sigma[j, t]) if weighted else 1.0
            acc = 0.0
            k = 0
            for p in range(indptr[i], indptr[i + 1]):
                j = indices[p]
                if dist[j, t] == want:
                    acc += float(sigma[j, t]) if weighted else 1.0
                    # cumulative probability in 30-bit fixed point above the node id
                    level = np.int64(min(acc / tot * _SCALE, _SCALE))
                    cand[pos + k] = (level << 32) | j
                    k += 1
            cand[pos + m - 1] = (np.int64(_SCALE) << 32) | (cand[pos + m - 1] & 0xFFFFFFFF)
            pos += m


def next_hop_table(g: Graph, rs: RoutingState, weighted: bool = True) -> tuple[np.ndarray, np.ndarray]:
    """Node-major next-hop lookup.

    ``first[i * n + t]`` is the unique next hop from ``i`` toward ``t`` when
    there is one, else ``-(k + 1)``: the candidates start at ``cand[k]``, each
    packing the cumulative selection probability (30-bit fixed point, high
    word) with the node id (low word); the last candidate's level is exactly
    ``2**30``. Weights follow ``sigma(j -> t)`` when ``weighted``, else are
    uniform. Cached on the routing state.
    """
    key = ("next_hops", bool(weighted))
    cached = rs._cache.get(key)
    if cached is not None:
        return cached
    if weighted and rs.sigma is None:
        raise SimulationError("weighted next hops need path counts; routing state is low-memory")
    total = _count_multi(g.indptr, g.indices, rs.dist)
    if total >= np.iinfo(np.int32).max:
        raise SimulationError("next-hop table too large for 32-bit indexing")
    first = np.empty(g.n * g.n, dtype=np.int32)
    cand = np.empty(total, dtype=np.int64)
    sigma = rs.sigma if rs.sigma is not None else np.zeros((1, 1), dtype=np.uint64)
    _fill_table(g.indptr, g.indices, rs.dist, sigma, bool(weighted), first, cand)
    rs._cache[key] = (first, cand)
    return first, cand


@numba.njit(cache=True, inline="always")
def _next_hop(first, cand, n, i, t, rng):
    f = first[i * n + t]
    if f >= 0:
        return f
    k = -f - 1
    u = np.int64(rng.random() * _SCALE)
    while (cand[k] >> 32) <= u:
        k += 1
    return np.int32(cand[k] & 0xFFFFFFFF)


@numba.njit(cache=True)
def _grow(arena, used, seg, cap, head, qlen, i):
    """Move node ``i``'s ring into a segment twice as large at the arena end."""
    new_cap = max(4, 2 * cap[i])
    live = 0
    for v in range(cap.shape[0]):
        live += cap[v]
    if used + new_cap > arena.shape[0]:
        # repack every ring at the front of a fresh arena
        size = max(2 * arena.shape[0], 2 * (live + new_cap))
        fresh = np.empty(size, dtype=np.int32)
        pos = 0
        for v in range(cap.shape[0]):
            c = cap[v]
            for a in range(qlen[v]):
                fresh[pos + a] = arena[seg[v] + (head[v] + a) % c]
            seg[v] = pos
            head[v] = 0
            pos += c
        arena = fresh
        used = pos
    c = cap[i]
    for a in range(qlen[i]):
        arena[used + a] = arena[seg[i] + (head[i] + a) % c]
    seg[i] = used
    head[i] = 0
    cap[i] = new_cap
    used += new_cap
    return arena, used


@numba.njit(cache=True)
def _run(first, cand, cap, lam, steps, rng, check, count_source):
    # Each node's FIFO is a ring of destinations inside one shared arena.
    # Packets forwarded during a step are appended behind the snapshot
    # ``avail`` so they cannot move again before the next step.
    n = cap.shape[0]
    seg = np.empty(n, dtype=np.int64)
    rcap = np.full(n, 4, dtype=np.int64)
    head = np.zeros(n, dtype=np.int64)
    qlen = np.zeros(n, dtype=np.int64)
    for i in range(n):
        seg[i] = 4 * i
    arena = np.empty(max(8 * n, 4 * lam), dtype=np.int32)
    used = 4 * n
    credit = np.zeros(n, dtype=np.float64)
    avail = np.zeros(n, dtype=np.int64)
    theta = np.zeros(steps, dtype=np.int64)
    created = 0
    delivered = 0
    conserved = True

    for step in range(steps):
        if not count_source:
            for i in range(n):
                avail[i] = qlen[i]
        for _ in range(lam):
            s = int(rng.random() * n)
            t = int(rng.random() * n)
            while t == s:
                t = int(rng.random() * n)
            created += 1
            if count_source:
                at = s
            else:
                # the source hands its own packet straight to the first hop
                at = _next_hop(first, cand, n, s, t, rng)
                if at == t:
                    delivered += 1
                    continue
            if qlen[at] == rcap[at]:
                arena, used = _grow(arena, used, seg, rcap, head, qlen, at)
            slot = head[at] + qlen[at]
            if slot >= rcap[at]:
                slot -= rcap[at]
            arena[seg[at] + slot] = t
            qlen[at] += 1
        if count_source:
            for i in range(n):
                avail[i] = qlen[i]

        for i in range(n):
            budget = cap[i] + credit[i]
            quota = int(np.floor(budget))
            credit[i] = budget - quota
            nf = quota if quota < avail[i] else avail[i]
            for _ in range(nf):
                t = arena[seg[i] + head[i]]
                head[i] += 1
                if head[i] == rcap[i]:
                    head[i] = 0
                qlen[i] -= 1
                j = _next_hop(first, cand, n, i, t, rng)
                if j == t:
                    delivered += 1
                else:
                    if qlen[j] == rcap[j]:
                        arena, used = _grow(arena, used, seg, rcap, head, qlen, j)
                    slot = head[j] + qlen[j]
                    if slot >= rcap[j]:
                        slot -= rcap[j]
                    arena[seg[j] + slot] = t
                    qlen[j] += 1

        theta[step] = created - delivered
        if check:
            held = 0
            for i in range(n):
                held += qlen[i]
            if held != created - delivered:
                conserved = False
    return theta, created, delivered, conserved


def order_parameter(theta: np.ndarray, lam: float, transient: int, window: int) -> tuple[float, float]:
    """Growth rate of in-flight packets per created packet.

    Averages ``(theta[t + window] - theta[t]) / (lam * window)`` over
    consecutive non-overlapping windows starting at ``transient``. Returns
    ``(clamped, raw)`` where ``clamped = max(raw, 0)``.
    """
    theta = np.asarray(theta, dtype=np.float64)
    if window < 1 or transient < 0:
        raise SimulationError("window must be >= 1 and transient >= 0")
    if theta.shape[0] < transient + window + 1:
        raise SimulationError(
            f"series of length {theta.shape[0]} too short for transient {transient} and window {window}"
        )
    starts = np.arange(transient, theta.shape[0] - window, window)
    diffs = theta[starts + window] - theta[starts]
    raw = float(diffs.mean() / (lam * window))
    return max(raw, 0.0), raw


def run(
    g: Graph,
    rs: RoutingState,
    cap: np.ndarray,
    cfg: SimConfig,
    check_conservation: bool = False,
    weighted: bool | None = None,
    count_source: bool = True,
) -> SimResult:
    """Simulate ``cfg.steps`` synchronous steps and measure the order parameter.

    ``weighted`` selects path-count-weighted next hops (default when the
    routing state carries path counts) or uniform choice among next hops.
    With ``count_source=False`` a created packet skips its source's queue and
    is handed directly to its first hop, so only transit nodes spend
    capability; pair it with ``betweenness(g, count_source=False)``.
    """
    cap = np.ascontiguousarray(cap, dtype=np.float64)
    if cap.shape != (g.n,):
        raise SimulationError(f"capability vector has shape {cap.shape}, graph has {g.n} nodes")
    if not np.all(np.isfinite(cap)) or np.any(cap < 0):
        raise SimulationError("capabilities must be finite and non-negative")
    if rs.n != g.n:
        raise SimulationError("routing state was built for a different graph")
    if weighted is None:
        weighted = rs.weighted
    if weighted and not rs.weighted:
        raise SimulationError("weighted next hops need path counts; routing state is low-memory")
    first, cand = next_hop_table(g, rs, bool(weighted))
    rng = np.random.default_rng(cfg.seed)
    theta, created, delivered, conserved = _run(
        first, cand, cap, int(cfg.lam), int(cfg.steps), rng, bool(check_conservation), bool(count_source)
    )
    eta, eta_raw = order_parameter(theta, cfg.lam, cfg.transient, cfg.window)
    return SimResult(
        theta=theta,
        eta=eta,
        eta_raw=eta_raw,
        created=int(created),
        delivered=int(delivered),
        steps_run=int(cfg.steps),
        conserved=bool(conserved) if check_conservation else None,
    )
