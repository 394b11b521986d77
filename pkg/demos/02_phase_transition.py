r"""
Free flow and congestion
========================

Sweep the packet-creation rate on a scale-free network and watch the order
parameter leave zero. Then let the bisection find the critical rate for
several allocations and compare it with the betweenness estimate.
"""

from nodecap import (
    LambdaSearchConfig,
    SimConfig,
    all_pairs,
    allocate,
    analytical_lambda_c,
    betweenness,
    find_lambda_c,
    generate_ba,
    run,
)

g = generate_ba(500, 3, seed=1)
rs = all_pairs(g)
b = betweenness(g)
print(f"BA network: {g.n} nodes, {g.n_edges} links, largest degree {g.degrees.max()}")

cap = allocate(g, "degree")
est, hub = analytical_lambda_c(cap, b, g.n)
print(f"capability proportional to degree; estimate {est:.0f}, bottleneck node {hub} (degree {g.degree(hub)})")

print("\n  lambda   eta      in flight at the end")
for factor in (0.5, 0.8, 0.95, 1.05, 1.2, 1.5):
    lam = max(1, int(round(factor * est)))
    res = run(g, rs, cap, SimConfig(lam=lam, steps=3000, transient=1000, seed=0))
    print(f"  {lam:6d}   {res.eta:.4f}   {res.in_flight}")

# eta is the backlog growth per created packet: flat below the transition,
# a steady climb once the busiest nodes cannot keep up.
search = LambdaSearchConfig(steps=3000, transient=1000, seeds=(0, 1))
for scheme in ("uniform", "degree", "betweenness"):
    cap = allocate(g, scheme, b=b)
    est, _ = analytical_lambda_c(cap, b, g.n)
    found = find_lambda_c(g, rs, cap, search, b=b)
    probes = ", ".join(f"{lam}:{eta:.3f}" for lam, eta in found.probes)
    print(f"\n{scheme}: simulated {found.lambda_c} (next probe {found.upper}), estimate {est:.0f}")
    print(f"  probes {probes}")
