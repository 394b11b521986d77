r"""
Choosing the capability exponent
================================

With ``C ~ k**alpha`` the critical rate peaks at some alpha*. The slope of
the largest betweenness per degree, ``B+(k) ~ k**alpha'``, predicts that
peak without running any traffic. This script compares the two on small
BA and PFP networks, in the transit-only convention where a packet's source
does not spend capability on it.
"""

import numpy as np

from nodecap import (
    LambdaSearchConfig,
    all_pairs,
    analytical_lambda_c,
    b_plus_by_degree,
    betweenness,
    estimate_alpha_star,
    generate_ba,
    generate_pfp,
    largest_connected_component,
    sweep_alpha,
)
from nodecap.allocation import allocate_degree_power

search = LambdaSearchConfig(eta_threshold=1e-3, count_source=False, steps=3000, transient=1000)
alphas = np.round(np.arange(0.6, 1.81, 0.2), 2)

for name, g in (("BA", generate_ba(600, 3, seed=2)), ("PFP", generate_pfp(600, seed=2))):
    g, _ = largest_connected_component(g)
    rs = all_pairs(g)
    b = betweenness(g, count_source=False)

    bplus = b_plus_by_degree(g, b)
    fit = estimate_alpha_star(g, count_source=False, b=b)
    ks = sorted(bplus)
    print(f"\n{name}: {g.n} nodes, degrees {ks[0]}..{ks[-1]}")
    print(f"  B+(k) fit: alpha' = {fit.alpha_prime:.3f} (r^2 {fit.r_squared:.3f}, {fit.n_points} degrees)")

    curve = sweep_alpha(g, rs, alphas, search, b=b)
    print("  alpha   simulated   estimate")
    for p in curve.samples:
        est, _ = analytical_lambda_c(allocate_degree_power(g, p.alpha), b, g.n, skip_idle=True)
        print(f"  {p.alpha:5.2f}   {p.lambda_c:9.0f}   {est:8.0f}")
    print(f"  simulated optimum alpha* = {curve.alpha_star:.2f}, lambda_c = {curve.lambda_c_star:.0f}")

# Left of the peak the hubs saturate first; right of it the hubs hoard
# capability and the many low-degree relays become the bottleneck.
