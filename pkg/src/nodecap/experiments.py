"""Config-driven reproduction of the capacity table and exponent curves.

A plan expands into one job per (model, replicate network). Each job builds
the network once, then measures every scheme and the alpha sweep on it and
writes ``jobs/<model>-<replicate>.json`` atomically. Finished job files are
reused, so an interrupted run resumes where it stopped. Aggregation into the
CSV tables only reads job files.

Network seeds are ``base_seed + replicate``.
"""

from __future__ import annotations

import configparser
import json
import logging
import os
import sys
import time
import traceback
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Iterable

import numpy as np

from ._io import atomic_write_text, write_csv
from .allocation import allocate
from .capacity import (
    CapacityCurve,
    CapacityError,
    CurvePoint,
    LambdaSearchConfig,
    analytical_lambda_c,
    combine_curves,
    estimate_alpha_star,
    find_lambda_c,
)
from .generators import GeneratorSpec, avg_clustering
from .graph import largest_connected_component
from .paths import all_pairs, betweenness

log = logging.getLogger(__name__)

WORKERS_ENV = "NODECAP_WORKERS"
# Table rows in display order; "alpha-star" is filled from the sweep.
TABLE_SCHEMES = ("uniform", "degree", "degree-power:1.5", "alpha-star", "betweenness")


class PlanError(ValueError):
    pass


def default_models(n: int = 4000) -> dict[str, GeneratorSpec]:
    return {
        "er": GeneratorSpec("er", n, l=3 * n),
        "ba": GeneratorSpec("ba", n, m=3),
        "pfp": GeneratorSpec("pfp", n),
    }


# Calibrated on pilot runs: free-flow noise is |eta| < 1e-4, and 1e-2 lands far
# past the point where throughput first falls short of injection.
REPRO_SEARCH = LambdaSearchConfig(eta_threshold=1e-3, count_source=False)


def default_alphas() -> tuple[float, ...]:
    return tuple(round(0.5 + 0.1 * i, 2) for i in range(16))


@dataclass(frozen=True)
class ExperimentPlan:
    models: dict[str, GeneratorSpec] = field(default_factory=default_models)
    schemes: tuple[str, ...] = TABLE_SCHEMES
    alphas: tuple[float, ...] = field(default_factory=default_alphas)
    replicates: int = 10
    base_seed: int = 0
    search: LambdaSearchConfig = REPRO_SEARCH
    out_dir: str = "results"
    workers: int = 1

    def __post_init__(self):
        if self.replicates < 1:
            raise PlanError("replicates must be >= 1")
        if not self.models:
            raise PlanError("plan has no models")
        for s in self.schemes:
            _parse_scheme(s)
        if "alpha-star" in self.schemes and not self.alphas:
            raise PlanError("alpha-star scheme needs a non-empty alpha grid")
        if list(self.alphas) != sorted(self.alphas):
            raise PlanError("alpha grid must be sorted")

    def seed_for(self, replicate: int) -> int:
        return self.base_seed + replicate

    def to_config(self) -> str:
        """Render as the key=value config format accepted by :func:`load_plan`."""
        lines = []
        cp = self._parser()
        for sec in cp.sections():
            lines.append(f"[{sec}]")
            lines.extend(f"{k} = {v}" for k, v in cp[sec].items())
            lines.append("")
        return "\n".join(lines)

    def command(self) -> str:
        """A ``nodecap reproduce`` invocation that rebuilds this exact plan."""
        cp = self._parser()
        sets = [f"{sec}.{k}={v.replace(' ', '')}" for sec in cp.sections() for k, v in cp[sec].items()]
        return "nodecap reproduce " + " ".join(f"--set {s}" for s in sets)

    def _parser(self) -> configparser.ConfigParser:
        cp = configparser.ConfigParser()
        cp["plan"] = {
            "replicates": str(self.replicates),
            "base_seed": str(self.base_seed),
            "schemes": ", ".join(self.schemes),
            "alphas": ", ".join(f"{a:g}" for a in self.alphas),
            "out_dir": self.out_dir,
            "workers": str(self.workers),
        }
        s = self.search
        cp["search"] = {
            "eta_threshold": repr(s.eta_threshold),
            "resolution": repr(s.resolution),
            "steps": str(s.steps),
            "transient": str(s.transient),
            "window": str(s.window),
            "sim_seeds": ", ".join(map(str, s.seeds)),
            "count_source": str(s.count_source).lower(),
            "lambda_cap": str(s.lambda_cap),
        }
        for name, spec in self.models.items():
            sec = {"model": spec.model, "n": str(spec.n)}
            if spec.model == "er":
                sec["l"] = str(spec.l)
            elif spec.model == "ba":
                sec["m"] = str(spec.m)
            else:
                sec.update(p=repr(spec.p), q=repr(spec.q), delta=repr(spec.delta))
            cp[f"model.{name}"] = sec
        return cp


def _parse_scheme(s: str) -> tuple[str, float | None]:
    if s in ("uniform", "degree", "betweenness", "alpha-star"):
        return s, None
    if s.startswith("degree-power:"):
        try:
            return "degree-power", float(s.split(":", 1)[1])
        except ValueError:
            pass
    raise PlanError(f"bad scheme {s!r}; use uniform, degree, degree-power:<alpha>, alpha-star or betweenness")


def _floats(text: str) -> tuple[float, ...]:
    return tuple(float(x) for x in text.replace(",", " ").split())


def load_plan(path: str | os.PathLike | None = None, overrides: dict[str, str] | None = None) -> ExperimentPlan:
    """Read a plan from a key=value config file; ``overrides`` (``section.key`` -> value) win over the file.

    Sections: ``[plan]``, ``[search]`` and one ``[model.<name>]`` per model.
    Absent model sections fall back to the default ER/BA/PFP trio.
    """
    cp = configparser.ConfigParser()
    if path is not None:
        p = Path(path)
        if not p.is_file():
            raise PlanError(f"config file not found: {p}")
        cp.read(p)
    for key, value in (overrides or {}).items():
        sec, _, opt = key.rpartition(".")
        sec = sec or "plan"
        if not cp.has_section(sec):
            cp.add_section(sec)
        cp[sec][opt] = str(value)
    try:
        return _plan_from_parser(cp)
    except (ValueError, KeyError, CapacityError) as exc:
        raise PlanError(f"invalid config: {exc}") from exc


def _plan_from_parser(cp: configparser.ConfigParser) -> ExperimentPlan:
    plan = cp["plan"] if cp.has_section("plan") else {}
    srch = cp["search"] if cp.has_section("search") else {}
    base = ExperimentPlan.__dataclass_fields__
    default_search = REPRO_SEARCH
    search = replace(
        default_search,
        eta_threshold=float(srch.get("eta_threshold", default_search.eta_threshold)),
        resolution=float(srch.get("resolution", default_search.resolution)),
        steps=int(srch.get("steps", default_search.steps)),
        transient=int(srch.get("transient", default_search.transient)),
        window=int(srch.get("window", default_search.window)),
        seeds=tuple(int(x) for x in _floats(srch["sim_seeds"])) if "sim_seeds" in srch else default_search.seeds,
        count_source=_bool(srch.get("count_source", str(default_search.count_source))),
        lambda_cap=int(srch.get("lambda_cap", default_search.lambda_cap)),
    )
    n_default = int(plan.get("n", 4000))
    models: dict[str, GeneratorSpec] = {}
    for sec in cp.sections():
        if not sec.startswith("model."):
            continue
        name = sec.split(".", 1)[1]
        m = cp[sec]
        kind = m.get("model", name)
        n = int(m.get("n", n_default))
        models[name] = GeneratorSpec(
            kind,
            n,
            l=int(m["l"]) if "l" in m else (3 * n if kind == "er" else None),
            m=int(m.get("m", 3)),
            p=float(m.get("p", 0.3)),
            q=float(m.get("q", 0.1)),
            delta=float(m.get("delta", 0.048)),
        )
    if not models:
        models = default_models(n_default)
        if "models" in plan:
            wanted = [x.strip() for x in plan["models"].split(",") if x.strip()]
            unknown = set(wanted) - set(models)
            if unknown:
                raise ValueError(f"unknown models {sorted(unknown)}")
            models = {k: models[k] for k in wanted}
    return ExperimentPlan(
        models=models,
        schemes=tuple(x.strip() for x in plan["schemes"].split(",")) if "schemes" in plan else TABLE_SCHEMES,
        alphas=_floats(plan["alphas"]) if "alphas" in plan else base["alphas"].default_factory(),
        replicates=int(plan.get("replicates", 10)),
        base_seed=int(plan.get("base_seed", 0)),
        search=search,
        out_dir=plan.get("out_dir", "results"),
        workers=int(plan.get("workers", os.environ.get(WORKERS_ENV, 1))),
    )


def _bool(text: str) -> bool:
    t = str(text).strip().lower()
    if t in ("1", "true", "yes", "on"):
        return True
    if t in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"not a boolean: {text!r}")


@dataclass(frozen=True)
class Job:
    model: str
    replicate: int
    spec: GeneratorSpec

    @property
    def name(self) -> str:
        return f"{self.model}-{self.replicate:02d}"


def jobs_for(plan: ExperimentPlan) -> list[Job]:
    # replicate-major, so a partial run covers every model evenly
    return [
        Job(name, r, replace(spec, seed=plan.seed_for(r)))
        for r in range(plan.replicates)
        for name, spec in plan.models.items()
    ]


def run_job(job: Job, plan: ExperimentPlan) -> dict:
    """Measure one network: topology, per-scheme critical rates, the alpha sweep and the B+ fit."""
    t0 = time.time()
    search = plan.search
    raw = job.spec.build()
    g, _ = largest_connected_component(raw)
    rs = all_pairs(g)
    n = g.n
    pairs = n * (n - 1)
    deg = g.degrees
    result: dict = {
        "job": job.name,
        "model": job.model,
        "replicate": job.replicate,
        "spec": asdict(job.spec),
        "topology": {
            "nodes_generated": raw.n,
            "links_generated": raw.n_edges,
            "nodes": n,
            "links": g.n_edges,
            "max_degree": int(deg.max()),
            "avg_degree": float(deg.mean()),
            "avg_distance": float(rs.dist.sum(dtype=np.int64)) / pairs,
            "avg_clustering": avg_clustering(g),
        },
        "schemes": {},
        "sweep": {},
        "errors": {},
    }
    b = betweenness(g, count_source=search.count_source)
    fit = estimate_alpha_star(g, count_source=search.count_source, b=b)
    result["fit"] = {"alpha_prime": fit.alpha_prime, "intercept": fit.intercept, "r_squared": fit.r_squared}
    skip_idle = not search.count_source
    by_alpha: dict[float, dict] = {}

    def measure(cap: np.ndarray, hint: float | None = None) -> dict:
        est, node = analytical_lambda_c(cap, b, n, skip_idle=skip_idle)
        local = search
        if hint is not None:
            local = replace(search, lambda_lo=max(1, int(0.92 * hint)), lambda_hi=max(2, int(1.08 * hint) + 1))
        res = find_lambda_c(g, rs, cap, local, b=b)
        return {
            "lambda_c": res.lambda_c,
            "upper": res.upper,
            "analytical": est,
            "bottleneck": node,
            "probes": [[int(x), float(e)] for x, e in res.probes],
        }

    def at_alpha(alpha: float, hint: float | None = None) -> dict:
        key = round(alpha, 6)
        if key not in by_alpha:
            by_alpha[key] = measure(allocate(g, "degree-power", alpha=alpha), hint)
        return by_alpha[key]

    for scheme in plan.schemes:
        kind, alpha = _parse_scheme(scheme)
        if kind == "alpha-star":
            continue
        try:
            if kind == "betweenness":
                result["schemes"][scheme] = measure(allocate(g, "betweenness", b=b))
            elif kind == "uniform":
                result["schemes"][scheme] = measure(allocate(g, "uniform"))
            else:
                result["schemes"][scheme] = at_alpha(1.0 if kind == "degree" else alpha)
        except Exception as exc:  # one failed cell must not sink the job
            result["errors"][scheme] = f"{type(exc).__name__}: {exc}"
            log.warning("%s %s failed: %s", job.name, scheme, exc)
    if "alpha-star" in plan.schemes:
        prev = None
        for a in plan.alphas:
            try:
                cell = at_alpha(a, prev)
                result["sweep"][f"{a:g}"] = cell
                prev = cell["lambda_c"]
            except Exception as exc:
                result["errors"][f"alpha={a:g}"] = f"{type(exc).__name__}: {exc}"
                prev = None
            print(f"[{job.name}] alpha={a:g} done ({time.time() - t0:.0f}s)", file=sys.stderr, flush=True)
    result["elapsed_s"] = time.time() - t0
    return result


def _job_path(plan: ExperimentPlan, job: Job) -> Path:
    return Path(plan.out_dir) / "jobs" / f"{job.name}.json"


def _run_and_store(job: Job, plan: ExperimentPlan) -> tuple[str, bool]:
    path = _job_path(plan, job)
    try:
        result = run_job(job, plan)
        ok = not result["errors"]
    except Exception as exc:
        result = {"job": job.name, "model": job.model, "replicate": job.replicate, "fatal": traceback.format_exc()}
        log.error("job %s failed: %s", job.name, exc)
        ok = False
    result["plan"] = plan.to_config()
    atomic_write_text(path, json.dumps(result, indent=1, sort_keys=True) + "\n")
    return job.name, ok


def run_plan(plan: ExperimentPlan, rerun: bool = False, progress=sys.stderr) -> dict[str, bool]:
    """Run every job without a stored success (or all with ``rerun``); returns job name -> success."""
    out = Path(plan.out_dir)
    (out / "jobs").mkdir(parents=True, exist_ok=True)
    atomic_write_text(out / "plan.ini", plan.to_config())
    # jobs with any failed cell are retried on resume
    todo = [j for j in jobs_for(plan) if rerun or not _succeeded(_job_path(plan, j))]
    status = {j.name: True for j in jobs_for(plan) if j not in todo}
    if plan.workers <= 1:
        for job in todo:
            print(f"[{job.name}] start", file=progress, flush=True)
            name, ok = _run_and_store(job, plan)
            status[name] = ok
            print(f"[{job.name}] {'ok' if ok else 'FAILED'}", file=progress, flush=True)
    else:
        with ProcessPoolExecutor(max_workers=plan.workers) as pool:
            futures = [pool.submit(_run_and_store, job, plan) for job in todo]
            for fut in as_completed(futures):
                name, ok = fut.result()
                status[name] = ok
                print(f"[{name}] {'ok' if ok else 'FAILED'}", file=progress, flush=True)
    return status


def _succeeded(path: Path) -> bool:
    if not path.exists():
        return False
    stored = _load(path)
    return "fatal" not in stored and not stored.get("errors")


def _load(path: Path) -> dict:
    return json.loads(path.read_text())


def load_results(plan: ExperimentPlan) -> list[dict]:
    results = []
    for job in jobs_for(plan):
        p = _job_path(plan, job)
        if p.exists():
            results.append(_load(p))
    return results


def _stats(values: Iterable[float]) -> tuple[float, float, float, int]:
    v = np.asarray(list(values), dtype=np.float64)
    if v.size == 0:
        return float("nan"), float("nan"), float("nan"), 0
    return float(v.mean()), float(v.min()), float(v.max()), int(v.size)


def model_curve(results: list[dict]) -> CapacityCurve | None:
    curves = []
    for r in results:
        sweep = r.get("sweep") or {}
        if sweep:
            pts = [CurvePoint(float(a), c["lambda_c"], c["lambda_c"], c["lambda_c"]) for a, c in sweep.items()]
            curves.append(CapacityCurve(sorted(pts, key=lambda p: p.alpha)))
    return combine_curves(curves) if curves else None


def summarize(plan: ExperimentPlan) -> dict[str, dict]:
    """Aggregate stored jobs per model: means with min/max over replicate networks."""
    results = load_results(plan)
    out: dict[str, dict] = {}
    for model in plan.models:
        rs = [r for r in results if r.get("model") == model and "fatal" not in r]
        entry: dict = {"replicates": len(rs), "topology": {}, "schemes": {}, "fit": None, "curve": None}
        if not rs:
            out[model] = entry
            continue
        for key in ("nodes", "links", "max_degree", "avg_distance", "avg_clustering"):
            entry["topology"][key] = _stats(r["topology"][key] for r in rs)
        for scheme in plan.schemes:
            if scheme == "alpha-star":
                continue
            cells = [r["schemes"][scheme] for r in rs if scheme in r.get("schemes", {})]
            entry["schemes"][scheme] = {
                "lambda_c": _stats(c["lambda_c"] for c in cells),
                "analytical": _stats(c["analytical"] for c in cells),
                "ratios": [c["lambda_c"] / c["analytical"] for c in cells],
            }
        entry["fit"] = _stats(r["fit"]["alpha_prime"] for r in rs if "fit" in r)
        curve = model_curve(rs)
        if curve is not None:
            best = curve.best
            entry["curve"] = curve
            entry["alpha_star"] = best.alpha
            entry["schemes"]["alpha-star"] = {
                "lambda_c": (best.lambda_c, best.lambda_min, best.lambda_max, len(best.values)),
                "analytical": _stats(
                    r["sweep"][f"{best.alpha:g}"]["analytical"] for r in rs if f"{best.alpha:g}" in r.get("sweep", {})
                ),
                "ratios": [
                    r["sweep"][f"{best.alpha:g}"]["lambda_c"] / r["sweep"][f"{best.alpha:g}"]["analytical"]
                    for r in rs
                    if f"{best.alpha:g}" in r.get("sweep", {})
                ],
            }
            # per-network optimum, for the spread of alpha*
            per_net = [max(sorted(r["sweep"].items(), key=lambda kv: float(kv[0])), key=lambda kv: kv[1]["lambda_c"])[0] for r in rs if r.get("sweep")]
            entry["alpha_star_per_network"] = _stats(float(a) for a in per_net)
        entry["errors"] = {r["job"]: r["errors"] for r in rs if r.get("errors")}
        out[model] = entry
    return out


def reproduce_table1(plan: ExperimentPlan, run: bool = True) -> Path:
    """Run (or resume) the plan and write ``table1.csv``, ``sweep.csv``, ``fit.csv`` and ``topology.csv``.

    Table bounds are min and max over replicate networks, not standard errors.
    """
    if run:
        run_plan(plan)
    out = Path(plan.out_dir)
    summary = summarize(plan)
    header = f"{plan.command()}  (bounds: min/max over replicate networks)"
    models = list(plan.models)

    rows = []
    for key in ("nodes", "links", "max_degree", "avg_distance", "avg_clustering"):
        rows.append([key] + [_fmt_stat(summary[m]["topology"].get(key)) for m in models])
    for scheme in plan.schemes:
        rows.append([f"lambda_c {scheme}"] + [_fmt_stat(summary[m]["schemes"].get(scheme, {}).get("lambda_c")) for m in models])
    rows.append(["alpha_star"] + [f"{summary[m].get('alpha_star', float('nan')):g}" for m in models])
    rows.append(["alpha_prime"] + [_fmt_stat(summary[m].get("fit")) for m in models])
    write_csv(out / "table1.csv", ["quantity"] + models, rows, header=header)

    sweep_rows = []
    for m in models:
        curve = summary[m].get("curve")
        if curve is None:
            continue
        for p in curve.samples:
            sweep_rows.append([m, p.alpha, p.lambda_c, p.lambda_min, p.lambda_max])
    write_csv(out / "sweep.csv", ["model", "alpha", "lambda_c_mean", "lambda_c_min", "lambda_c_max"], sweep_rows, header=header)

    fit_rows, topo_rows, cell_rows = [], [], []
    for r in sorted(load_results(plan), key=lambda r: r["job"]):
        if "fatal" in r:
            continue
        fit_rows.append([r["model"], r["replicate"], r["fit"]["alpha_prime"], r["fit"]["intercept"], r["fit"]["r_squared"]])
        t = r["topology"]
        topo_rows.append([r["model"], r["replicate"], t["nodes"], t["links"], t["max_degree"], t["avg_distance"], t["avg_clustering"]])
        for scheme, c in r["schemes"].items():
            cell_rows.append([r["model"], r["replicate"], scheme, c["lambda_c"], c["analytical"]])
        for a, c in r["sweep"].items():
            cell_rows.append([r["model"], r["replicate"], f"degree-power:{a}", c["lambda_c"], c["analytical"]])
    write_csv(out / "fit.csv", ["model", "replicate", "alpha_prime", "intercept", "r_squared"], fit_rows, header=header)
    write_csv(
        out / "topology.csv",
        ["model", "replicate", "nodes", "links", "max_degree", "avg_distance", "avg_clustering"],
        topo_rows,
        header=header,
    )
    write_csv(out / "cells.csv", ["model", "replicate", "scheme", "lambda_c", "analytical"], cell_rows, header=header)
    return out / "table1.csv"


def _fmt_stat(stat) -> str:
    if not stat or stat[3] == 0:
        return "failed"
    mean, lo, hi, _ = stat
    return f"{mean:.4g} [{lo:.4g}, {hi:.4g}]"
