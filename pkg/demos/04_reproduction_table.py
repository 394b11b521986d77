r"""
Reading a finished reproduction
===============================

``nodecap reproduce`` leaves one JSON per network under ``<out_dir>/jobs``
and the plan it ran in ``<out_dir>/plan.ini``. This script reloads them and
prints the critical rates per allocation, the capacity curve over alpha and
the two exponents, next to the published values. Pass another results
directory as the first argument to inspect a different run.
"""

import sys
from pathlib import Path

from nodecap.experiments import load_plan, summarize

out = Path(sys.argv[1] if len(sys.argv) > 1 else Path(__file__).parent.parent / "results" / "table1")
plan = load_plan(out / "plan.ini", {"plan.out_dir": str(out)})
summary = summarize(plan)

published = {
    "er": {"uniform": 885, "degree": 2616, "degree-power:1.5": 4319, "alpha-star": 4319, "betweenness": 6576},
    "ba": {"uniform": 57, "degree": 1289, "degree-power:1.5": 2954, "alpha-star": 3284, "betweenness": 7604},
    "pfp": {"uniform": 48, "degree": 4419, "degree-power:1.5": 1636, "alpha-star": 5126, "betweenness": 11592},
}
exponents = {"er": (1.50, 1.49), "ba": (1.40, 1.37), "pfp": (1.10, 1.11)}

for model, entry in summary.items():
    if not entry["replicates"]:
        print(f"\n{model.upper()}: no finished networks yet")
        continue
    topo = entry["topology"]
    print(f"\n{model.upper()}: {entry['replicates']} networks, "
          f"<d> {topo['avg_distance'][0]:.2f}, C {topo['avg_clustering'][0]:.3f}, k_max {topo['max_degree'][0]:.0f}")
    print("  allocation         simulated [min, max]     estimate   published")
    for scheme, cell in entry["schemes"].items():
        mean, lo, hi, _ = cell["lambda_c"]
        print(f"  {scheme:17s}  {mean:7.0f} [{lo:5.0f}, {hi:5.0f}]   {cell['analytical'][0]:8.0f}   "
              f"{published[model].get(scheme, float('nan')):9.0f}")
    star, prime = exponents[model]
    print(f"  alpha* {entry['alpha_star']:.2f} (published {star}), alpha' {entry['fit'][0]:.3f} (published {prime})")
    print("  " + "  ".join(f"{p.alpha:g}:{p.lambda_c:.0f}" for p in entry["curve"].samples))
    for job, errors in entry["errors"].items():
        print(f"  {job} failed cells: {errors}")

# The estimate is a work bound: past it the busiest node falls behind. With
# only a few weak bottlenecks the backlog grows slowly, roughly
# eta ~ (C_i / estimate) * (1 - estimate / lambda), so a fixed eta threshold
# can sit well above the estimate when the bottleneck has little capability.
