r"""
Routing fields and betweenness
==============================

Shortest-path routing on a small graph, the two betweenness conventions,
and the estimate of the critical rate that follows from them.
"""

import numpy as np

from nodecap import all_pairs, allocate, analytical_lambda_c, betweenness, from_edge_list
from nodecap.paths import successors

# A 3x2 ladder: nodes 0-1-2 on top, 3-4-5 below, rungs between them.
g = from_edge_list([(0, 1), (1, 2), (3, 4), (4, 5), (0, 3), (1, 4), (2, 5)])
rs = all_pairs(g)

print("hop distances d(i, t):")
print(rs.dist)
print("shortest-path counts sigma(i -> t):")
print(rs.sigma)

# From corner 0 to the far corner 5 there are three shortest paths, two of
# them through node 1. The next hop is drawn in proportion to the number of
# paths that continue through it.
for j, w in successors(rs, g, 0, 5):
    print(f"0 -> 5 via {j}: weight {w}")

b_src = betweenness(g)
b_mid = betweenness(g, count_source=False)
print("betweenness, sources counted:", np.round(b_src, 3))
print("betweenness, transit only:   ", np.round(b_mid, 3))
print("difference is N - 1 =", g.n - 1, "for every node:", np.allclose(b_src - b_mid, g.n - 1))

# Uniform capability puts the bottleneck at the busiest node; allocating in
# proportion to betweenness makes every node a bottleneck at once.
for scheme in ("uniform", "degree", "betweenness"):
    cap = allocate(g, scheme, b=b_src)
    est, node = analytical_lambda_c(cap, b_src, g.n)
    print(f"{scheme:12s} capability {np.round(cap, 2)}  estimate {est:.2f} (bottleneck {node})")
