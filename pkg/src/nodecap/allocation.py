"""Node-capability allocation under the fixed budget ``sum(C) = 2L``."""

from __future__ import annotations

import numpy as np

from .graph import Graph

SCHEMES = ("uniform", "degree", "degree-power", "betweenness")


class AllocationError(ValueError):
    pass


def normalize(weights: np.ndarray, budget: float) -> np.ndarray:
    """Scale non-negative ``weights`` so they sum to ``budget``."""
    w = np.asarray(weights, dtype=np.float64)
    if not np.all(np.isfinite(w)) or np.any(w < 0) or not np.any(w > 0):
        raise AllocationError("allocation weights must be finite, non-negative and not all zero")
    # scale by the max first so huge exponents do not overflow the sum
    w = w / w.max()
    return budget * w / w.sum()


def allocate_degree_power(g: Graph, alpha: float) -> np.ndarray:
    """Capability ``C_i = 2L k_i^alpha / sum_j k_j^alpha``."""
    if not np.isfinite(alpha):
        raise AllocationError(f"alpha must be finite, got {alpha}")
    k = g.degrees.astype(np.float64)
    if np.any(k == 0):
        raise AllocationError("graph has isolated nodes; reduce to the largest connected component first")
    # work in log space: k**alpha overflows for large alpha on hub-heavy graphs
    logw = alpha * np.log(k)
    return normalize(np.exp(logw - logw.max()), 2.0 * g.n_edges)


def allocate_uniform(g: Graph) -> np.ndarray:
    return np.full(g.n, 2.0 * g.n_edges / g.n)


def allocate_betweenness(g: Graph, b: np.ndarray) -> np.ndarray:
    """Capability proportional to betweenness, ``C_i = 2L B(i) / sum_j B(j)``.

    With interior-only betweenness, nodes that are never in transit get zero.
    """
    b = np.asarray(b, dtype=np.float64)
    if b.shape != (g.n,):
        raise AllocationError(f"betweenness has shape {b.shape}, graph has {g.n} nodes")
    return normalize(b, 2.0 * g.n_edges)


def allocate(g: Graph, scheme: str, alpha: float | None = None, b: np.ndarray | None = None) -> np.ndarray:
    """Dispatch on a scheme name from :data:`SCHEMES`."""
    if scheme == "uniform":
        return allocate_uniform(g)
    if scheme == "degree":
        return allocate_degree_power(g, 1.0)
    if scheme == "degree-power":
        if alpha is None:
            raise AllocationError("degree-power scheme needs alpha")
        return allocate_degree_power(g, alpha)
    if scheme == "betweenness":
        if b is None:
            from .paths import betweenness

            b = betweenness(g)
        return allocate_betweenness(g, b)
    raise AllocationError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
