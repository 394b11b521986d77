"""Command-line entry points.

Every output file starts with a ``#`` line holding the fully resolved command
that produced it. Progress goes to standard error. Exit codes: 0 success,
1 computation failure, 2 bad input or configuration.
"""

from __future__ import annotations

import argparse
import logging
import shlex
import sys
from pathlib import Path

import numpy as np

from . import experiments
from ._io import read_csv, write_csv
from .allocation import SCHEMES, AllocationError, allocate
from .capacity import (
    CapacityError,
    LambdaSearchConfig,
    analytical_lambda_c,
    combine_curves,
    estimate_alpha_star,
    find_lambda_c,
    fit_bplus_exponent,
    sweep_alpha,
)
from .generators import MODELS, GeneratorSpec, topology_stats
from .graph import GraphError, largest_connected_component, read_edge_list, write_edge_list
from .paths import RoutingError, all_pairs, b_plus_by_degree, betweenness, degree_counts
from .simulation import DEFAULT_STEPS, DEFAULT_TRANSIENT, DEFAULT_WINDOW, SimConfig, SimulationError, run

log = logging.getLogger("nodecap")


class UsageError(Exception):
    """Bad input: maps to exit code 2."""


def _need_file(path: str) -> Path:
    p = Path(path)
    if not p.is_file():
        raise UsageError(f"file not found: {p}")
    return p


def _load_graph(path: str):
    return read_edge_list(_need_file(path))


def _load_capability(path: str, n: int) -> np.ndarray:
    _, rows = read_csv(_need_file(path))
    try:
        pairs = sorted((int(r["node"]), float(r["capability"])) for r in rows)
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{path}: expected columns node,capability ({exc})") from None
    if [i for i, _ in pairs] != list(range(n)):
        raise UsageError(f"{path}: capability must list every node 0..{n - 1} exactly once")
    return np.array([c for _, c in pairs])


def _resolved(args: argparse.Namespace) -> str:
    """Rebuild the command line from parsed arguments, defaults included."""
    parts = ["nodecap", args.command]
    for key, value in sorted(vars(args).items()):
        if key in ("command", "func", "verbose") or value is None:
            continue
        flag = "--" + key.replace("_", "-")
        if isinstance(value, bool):
            parts.append(flag if value else "--no-" + key.replace("_", "-"))
        elif key == "alphas":
            parts += [flag, ",".join(f"{a:g}" for a in value)]
        elif isinstance(value, (list, tuple)):
            parts += [flag, *map(str, value)]
        else:
            parts += [flag, str(value)]
    return shlex.join(parts)


def _search(args: argparse.Namespace) -> LambdaSearchConfig:
    try:
        return _search_config(args)
    except CapacityError as exc:
        raise UsageError(str(exc)) from None


def _search_config(args: argparse.Namespace) -> LambdaSearchConfig:
    return LambdaSearchConfig(
        eta_threshold=args.eta_threshold,
        lambda_lo=args.lambda_lo,
        lambda_hi=args.lambda_hi,
        resolution=args.resolution,
        steps=args.steps,
        transient=args.transient,
        window=args.window,
        seeds=tuple(args.seeds),
        count_source=args.count_source,
        lambda_cap=args.lambda_cap,
    )


def parse_alphas(text: str) -> list[float]:
    """``lo:hi:step`` (inclusive) or a comma-separated list."""
    try:
        if ":" in text:
            lo, hi, step = (float(x) for x in text.split(":"))
            if step <= 0 or hi < lo:
                raise ValueError
            count = int(round((hi - lo) / step)) + 1
            return [round(lo + i * step, 10) for i in range(count)]
        return sorted(float(x) for x in text.split(",") if x.strip())
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad alpha grid {text!r}; use lo:hi:step or a,b,c") from None


def cmd_generate(args) -> int:
    spec = GeneratorSpec(args.model, args.n, seed=args.seed, l=args.l, m=args.m, p=args.p, q=args.q, delta=args.delta)
    g = spec.build()
    if args.lcc:
        g, _ = largest_connected_component(g)
    write_edge_list(g, args.out, header=_resolved(args))
    print(f"{args.model}: {g.n} nodes, {g.n_edges} links -> {args.out}", file=sys.stderr)
    return 0


def cmd_stats(args) -> int:
    g = _load_graph(args.graph)
    stats = topology_stats(g)
    write_csv(args.out, ["quantity", "value"], list(stats.items()), header=_resolved(args))
    return 0


def cmd_betweenness(args) -> int:
    g = _load_graph(args.graph)
    b = betweenness(g, count_source=args.count_source)
    rows = [(i, int(d), float(v)) for i, (d, v) in enumerate(zip(g.degrees, b))]
    write_csv(args.out, ["node", "degree", "betweenness"], rows, header=_resolved(args))
    return 0


def cmd_bplus(args) -> int:
    g = _load_graph(args.graph)
    b = betweenness(g, count_source=args.count_source)
    bp = b_plus_by_degree(g, b)
    counts = degree_counts(g)
    rows = [(k, bp[k], counts[k]) for k in sorted(bp)]
    write_csv(args.out, ["k", "b_plus", "count_of_k_degree_nodes"], rows, header=_resolved(args))
    return 0


def cmd_allocate(args) -> int:
    g = _load_graph(args.graph)
    b = betweenness(g, count_source=args.count_source) if args.scheme == "betweenness" else None
    cap = allocate(g, args.scheme, alpha=args.alpha, b=b)
    write_csv(args.out, ["node", "capability"], list(enumerate(cap.tolist())), header=_resolved(args))
    return 0


def cmd_simulate(args) -> int:
    g = _load_graph(args.graph)
    cap = _load_capability(args.capability, g.n)
    try:
        cfg = SimConfig(lam=args.lam, steps=args.steps, transient=args.transient, window=args.window, seed=args.seed)
    except SimulationError as exc:
        raise UsageError(str(exc)) from None
    rs = all_pairs(g, low_memory=not args.weighted)
    res = run(g, rs, cap, cfg, check_conservation=True, weighted=args.weighted, count_source=args.count_source)
    summary = f"eta={res.eta!r} eta_raw={res.eta_raw!r} delivered={res.delivered} created={res.created}"
    write_csv(
        args.out,
        ["step", "theta"],
        enumerate(res.theta.tolist()),
        header=_resolved(args),
        footer=[summary],
    )
    print(summary)
    return 0 if res.conserved else 1


def _capability_for(args, g):
    if args.capability:
        return _load_capability(args.capability, g.n)
    if not args.scheme:
        raise UsageError("give --capability or --scheme")
    b = betweenness(g, count_source=args.count_source) if args.scheme == "betweenness" else None
    return allocate(g, args.scheme, alpha=args.alpha, b=b)


def cmd_lambda_c(args) -> int:
    g = _load_graph(args.graph)
    cap = _capability_for(args, g)
    b = betweenness(g, count_source=args.count_source)
    est, node = analytical_lambda_c(cap, b, g.n, skip_idle=not args.count_source)
    res = find_lambda_c(g, all_pairs(g), cap, _search(args), b=b)
    footer = [f"lambda_c={res.lambda_c} upper={res.upper} analytical={est!r} bottleneck={node}"]
    write_csv(args.out, ["lambda", "eta"], res.probes, header=_resolved(args), footer=footer)
    print(footer[0])
    return 0


def cmd_sweep_alpha(args) -> int:
    search = _search(args)
    curves = []
    for path in args.graph:
        g = _load_graph(path)
        b = betweenness(g, count_source=args.count_source)
        print(f"sweeping {path}", file=sys.stderr, flush=True)
        curves.append(sweep_alpha(g, all_pairs(g), args.alphas, search, b=b, refine=args.refine))
    curve = combine_curves(curves)
    rows = [(p.alpha, p.lambda_c, p.lambda_min, p.lambda_max) for p in curve.samples]
    footer = [f"alpha_star={curve.alpha_star!r} lambda_c_star={curve.lambda_c_star!r}"]
    write_csv(
        args.out, ["alpha", "lambda_c_mean", "lambda_c_min", "lambda_c_max"], rows, header=_resolved(args), footer=footer
    )
    print(footer[0])
    return 0


def _write_fit(args, fit) -> None:
    write_csv(
        args.out,
        ["alpha_prime", "intercept", "r_squared"],
        [(fit.alpha_prime, fit.intercept, fit.r_squared)],
        header=_resolved(args),
    )
    print(f"alpha_prime={fit.alpha_prime!r}")


def cmd_fit_bplus(args) -> int:
    _, rows = read_csv(_need_file(args.bplus))
    try:
        bp = {int(r["k"]): float(r["b_plus"]) for r in rows}
    except (KeyError, ValueError) as exc:
        raise UsageError(f"{args.bplus}: expected columns k,b_plus ({exc})") from None
    _write_fit(args, fit_bplus_exponent(bp))
    return 0


def cmd_estimate(args) -> int:
    g = _load_graph(args.graph)
    _write_fit(args, estimate_alpha_star(g, count_source=args.count_source))
    return 0


def cmd_reproduce(args) -> int:
    overrides = {}
    for item in args.set or []:
        key, sep, value = item.partition("=")
        if not sep:
            raise UsageError(f"--set expects section.key=value, got {item!r}")
        overrides[key] = value
    if args.out_dir:
        overrides["plan.out_dir"] = args.out_dir
    if args.workers:
        overrides["plan.workers"] = str(args.workers)
    plan = experiments.load_plan(args.config, overrides)
    if args.aggregate_only:
        table = experiments.reproduce_table1(plan, run=False)
        ok = True
    else:
        status = experiments.run_plan(plan, rerun=args.rerun)
        table = experiments.reproduce_table1(plan, run=False)
        ok = all(status.values())
    print(table)
    return 0 if ok else 1


def _add_search(p: argparse.ArgumentParser) -> None:
    d = LambdaSearchConfig()
    p.add_argument("--eta-threshold", type=float, default=d.eta_threshold, help="phase threshold on eta")
    p.add_argument("--lambda-lo", type=int, help="initial lower bracket (default: from the analytical estimate)")
    p.add_argument("--lambda-hi", type=int, help="initial upper bracket (default: from the analytical estimate)")
    p.add_argument("--resolution", type=float, default=d.resolution, help="relative bracket width to stop at")
    p.add_argument("--lambda-cap", type=int, default=d.lambda_cap, help="give up if still free flowing at this rate")
    p.add_argument("--seeds", type=int, nargs="+", default=list(d.seeds), help="simulation seeds averaged per probe")
    _add_sim(p)


def _add_sim(p: argparse.ArgumentParser) -> None:
    p.add_argument("--steps", type=int, default=DEFAULT_STEPS, help="time steps per simulation")
    p.add_argument("--transient", type=int, default=DEFAULT_TRANSIENT, help="steps discarded before measuring")
    p.add_argument("--window", type=int, default=DEFAULT_WINDOW, help="measurement window length")
    _add_count_source(p)


def _add_count_source(p: argparse.ArgumentParser) -> None:
    p.add_argument(
        "--count-source",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="count a packet's source as a hop that spends capability (--no-count-source: transit nodes only)",
    )


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="nodecap", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate an ER, BA or PFP network")
    p.add_argument("--model", choices=MODELS, required=True)
    p.add_argument("--n", type=int, required=True, help="node count")
    p.add_argument("--l", type=int, help="ER link count")
    p.add_argument("--m", type=int, default=3, help="BA links per new node")
    p.add_argument("--p", type=float, default=0.3, help="PFP probability of the one-host/two-peer step")
    p.add_argument("--q", type=float, default=0.1, help="PFP probability of the one-host/one-peer step")
    p.add_argument("--delta", type=float, default=0.048, help="PFP preference exponent")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--lcc", action=argparse.BooleanOptionalAction, default=False, help="keep only the largest component")
    p.add_argument("--out", required=True, help="edge list to write")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("stats", help="topology statistics of an edge list")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("betweenness", help="per-node betweenness")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_count_source(p)
    p.set_defaults(func=cmd_betweenness)

    p = sub.add_parser("bplus", help="largest betweenness per degree")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_count_source(p)
    p.set_defaults(func=cmd_bplus)

    p = sub.add_parser("allocate", help="node capabilities under the fixed budget 2L")
    p.add_argument("--graph", required=True)
    p.add_argument("--scheme", choices=SCHEMES, required=True)
    p.add_argument("--alpha", type=float, help="exponent for degree-power")
    p.add_argument("--out", required=True)
    _add_count_source(p)
    p.set_defaults(func=cmd_allocate)

    p = sub.add_parser("simulate", help="run the traffic model at one rate")
    p.add_argument("--graph", required=True)
    p.add_argument("--capability", required=True, help="CSV with node,capability")
    p.add_argument("--lambda", dest="lam", type=int, required=True, help="packets created per step")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument(
        "--weighted",
        action=argparse.BooleanOptionalAction,
        default=True,
        help="weight next hops by path counts (--no-weighted: uniform among next hops)",
    )
    p.add_argument("--out", required=True)
    _add_sim(p)
    p.set_defaults(func=cmd_simulate)

    for name, func, helptext in (
        ("lambda-c", cmd_lambda_c, "bisect for the critical rate"),
        ("sweep-alpha", cmd_sweep_alpha, "critical rate across degree-power exponents"),
    ):
        p = sub.add_parser(name, help=helptext)
        if name == "lambda-c":
            p.add_argument("--graph", required=True)
            p.add_argument("--capability", help="CSV with node,capability")
            p.add_argument("--scheme", choices=SCHEMES, help="allocate instead of reading --capability")
            p.add_argument("--alpha", type=float, help="exponent for degree-power")
        else:
            p.add_argument("--graph", required=True, nargs="+", help="one or more replicate networks")
            p.add_argument("--alphas", type=parse_alphas, default=parse_alphas("0:3:0.1"), help="lo:hi:step or a,b,c")
            p.add_argument("--refine", action=argparse.BooleanOptionalAction, default=False, help="refine near the peak")
        p.add_argument("--out", required=True)
        _add_search(p)
        p.set_defaults(func=func)

    p = sub.add_parser("fit-bplus", help="fit B+(k) ~ k^alpha' from a bplus CSV")
    p.add_argument("--bplus", required=True, help="CSV with k,b_plus")
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_fit_bplus)

    p = sub.add_parser("estimate", help="no-simulation estimate of the optimal exponent")
    p.add_argument("--graph", required=True)
    p.add_argument("--out", required=True)
    _add_count_source(p)
    p.set_defaults(func=cmd_estimate)

    p = sub.add_parser("reproduce", help="run the full multi-model experiment plan")
    p.add_argument("--config", help="key=value plan file with [plan], [search] and [model.<name>] sections")
    p.add_argument("--set", action="append", metavar="SECTION.KEY=VALUE", help="override one config value")
    p.add_argument("--out-dir", help="results directory")
    p.add_argument("--workers", type=int, help=f"parallel jobs (default ${experiments.WORKERS_ENV} or 1)")
    p.add_argument("--rerun", action="store_true", help="recompute jobs that already have results")
    p.add_argument("--aggregate-only", action="store_true", help="only rebuild the tables from stored jobs")
    p.set_defaults(func=cmd_reproduce)
    return ap


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr)
    try:
        return args.func(args)
    except (UsageError, GraphError, AllocationError, experiments.PlanError, FileNotFoundError) as exc:
        print(f"nodecap {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (CapacityError, SimulationError, RoutingError) as exc:
        print(f"nodecap {args.command}: failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
