"""Critical-rate search, exponent sweeps, and the betweenness-based estimator."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import optimize, stats

from .allocation import allocate_degree_power
from .graph import Graph
from .paths import RoutingState, b_plus_by_degree, betweenness
from .simulation import DEFAULT_STEPS, DEFAULT_TRANSIENT, DEFAULT_WINDOW, SimConfig, run

log = logging.getLogger(__name__)


class CapacityError(RuntimeError):
    pass


@dataclass(frozen=True)
class LambdaSearchConfig:
    """Bisection settings for locating the critical rate.

    ``lambda_lo``/``lambda_hi`` default to a bracket around the analytical
    estimate when betweenness is supplied, else to ``[1, 2]`` with doubling.
    ``seeds`` are simulation seeds whose order parameters are averaged at
    each probe.
    """

    eta_threshold: float = 0.01
    lambda_lo: int | None = None
    lambda_hi: int | None = None
    resolution: float = 0.02
    lambda_cap: int = 1_000_000
    steps: int = DEFAULT_STEPS
    transient: int = DEFAULT_TRANSIENT
    window: int = DEFAULT_WINDOW
    seeds: tuple[int, ...] = (0,)
    count_source: bool = True
    bracket: tuple[float, float] = (0.8, 1.25)

    def __post_init__(self):
        if not 0 < self.eta_threshold < 1:
            raise CapacityError("eta_threshold must lie in (0, 1)")
        if self.lambda_lo is not None and self.lambda_hi is not None and self.lambda_lo >= self.lambda_hi:
            raise CapacityError("need lambda_lo < lambda_hi")
        if self.resolution <= 0:
            raise CapacityError("resolution must be positive")
        if not self.seeds:
            raise CapacityError("need at least one simulation seed")


@dataclass
class LambdaCResult:
    """Outcome of one bisection.

    ``lambda_c`` is the largest probed rate in free flow; ``upper`` the
    smallest probed rate found congested. ``probes`` lists ``(lambda, eta)``
    in probe order.
    """

    lambda_c: int
    upper: int
    probes: list[tuple[int, float]] = field(default_factory=list)


@dataclass
class CurvePoint:
    alpha: float
    lambda_c: float
    lambda_min: float
    lambda_max: float
    values: tuple[float, ...] = ()


@dataclass
class CapacityCurve:
    samples: list[CurvePoint]

    @property
    def best(self) -> CurvePoint:
        # max mean lambda_c, ties to the smaller alpha
        return max(sorted(self.samples, key=lambda s: s.alpha), key=lambda s: s.lambda_c)

    @property
    def alpha_star(self) -> float:
        return self.best.alpha

    @property
    def lambda_c_star(self) -> float:
        return self.best.lambda_c


@dataclass(frozen=True)
class FitResult:
    alpha_prime: float
    intercept: float
    r_squared: float
    n_points: int


def analytical_lambda_c(cap: np.ndarray, b: np.ndarray, n: int, skip_idle: bool = False) -> tuple[float, int]:
    """Estimator ``min_i C_i N (N - 1) / B_i`` and the bottleneck node.

    Zero betweenness is an error unless ``skip_idle`` is set, in which case
    such nodes (which never carry transit traffic) impose no limit.
    """
    cap = np.asarray(cap, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if cap.shape != b.shape or cap.shape != (n,):
        raise CapacityError(f"capability {cap.shape} and betweenness {b.shape} must both have length {n}")
    busy = b > 0
    if not busy.all():
        if not skip_idle:
            raise CapacityError(f"node {int(np.flatnonzero(~busy)[0])} has zero betweenness")
        if not busy.any():
            raise CapacityError("no node carries transit traffic")
    ratio = np.full(n, np.inf)
    ratio[busy] = cap[busy] * n * (n - 1) / b[busy]
    i = int(np.argmin(ratio))
    return float(ratio[i]), i


def measure_eta(g: Graph, rs: RoutingState, cap: np.ndarray, lam: int, search: LambdaSearchConfig) -> float:
    """Order parameter at rate ``lam`` averaged over the configured seeds, then clamped at zero."""
    raw = []
    for seed in search.seeds:
        cfg = SimConfig(lam=lam, steps=search.steps, transient=search.transient, window=search.window, seed=seed)
        raw.append(run(g, rs, cap, cfg, count_source=search.count_source).eta_raw)
    return max(float(np.mean(raw)), 0.0)


def bisect_threshold(
    eta_at: Callable[[int], float],
    threshold: float,
    lo: int,
    hi: int,
    resolution: float = 0.02,
    cap: int = 1_000_000,
) -> LambdaCResult:
    """Integer bisection for the last rate with ``eta_at(rate) < threshold``.

    The bracket is widened first: ``lo`` halves while it is congested and
    ``hi`` doubles while it is free.
    """
    probes: list[tuple[int, float]] = []

    def probe(lam: int) -> bool:
        eta = eta_at(lam)
        probes.append((lam, eta))
        log.debug("lambda=%d eta=%.5f", lam, eta)
        return eta < threshold

    lo = max(1, int(lo))
    hi = max(lo + 1, int(hi))
    while not probe(lo):
        if lo == 1:
            raise CapacityError(f"lower side failed: eta >= {threshold} already at lambda=1")
        hi, lo = lo, max(1, lo // 2)
    while probe(hi):
        if hi >= cap:
            raise CapacityError(f"upper side failed: still free flow at lambda cap {cap}")
        lo, hi = hi, min(cap, 2 * hi)
    while hi - lo > 1 and (hi - lo) > resolution * lo:
        mid = (lo + hi) // 2
        if probe(mid):
            lo = mid
        else:
            hi = mid
    return LambdaCResult(lambda_c=lo, upper=hi, probes=probes)


def find_lambda_c(
    g: Graph,
    rs: RoutingState,
    cap: np.ndarray,
    search: LambdaSearchConfig = LambdaSearchConfig(),
    b: np.ndarray | None = None,
) -> LambdaCResult:
    """Locate the critical rate by bisection on the simulated order parameter.

    Passing the matching betweenness ``b`` seeds the bracket with the
    analytical estimate, which saves several simulations.
    """
    lo, hi = search.lambda_lo, search.lambda_hi
    if lo is None or hi is None:
        if b is not None:
            est, _ = analytical_lambda_c(cap, b, g.n, skip_idle=not search.count_source)
            guess_lo = max(1, int(math.floor(search.bracket[0] * est)))
            guess_hi = max(guess_lo + 1, int(math.ceil(search.bracket[1] * est)))
        else:
            guess_lo, guess_hi = 1, 2
        lo = guess_lo if lo is None else lo
        hi = guess_hi if hi is None else hi
        if lo >= hi:
            hi = lo + 1
    return bisect_threshold(
        lambda lam: measure_eta(g, rs, cap, lam, search),
        search.eta_threshold,
        lo,
        hi,
        search.resolution,
        search.lambda_cap,
    )


def sweep_alpha(
    g: Graph,
    rs: RoutingState,
    alphas: Sequence[float],
    search: LambdaSearchConfig = LambdaSearchConfig(),
    b: np.ndarray | None = None,
    refine: bool = False,
) -> CapacityCurve:
    """Critical rate under ``C ~ k**alpha`` for each alpha on one network.

    With ``refine`` a bounded scalar search around the best grid point adds
    extra samples.
    """
    alphas = list(alphas)
    if not alphas:
        raise CapacityError("alpha grid is empty")
    if any(a2 < a1 for a1, a2 in zip(alphas, alphas[1:])):
        raise CapacityError("alpha grid must be sorted")
    cache: dict[float, float] = {}

    def lam_c(alpha: float) -> float:
        alpha = round(float(alpha), 6)
        if alpha not in cache:
            cap = allocate_degree_power(g, alpha)
            cache[alpha] = float(find_lambda_c(g, rs, cap, search, b).lambda_c)
            log.info("alpha=%.3f lambda_c=%d", alpha, cache[alpha])
        return cache[alpha]

    for a in alphas:
        lam_c(a)
    if refine and len(alphas) > 1:
        best = max(alphas, key=lambda a: (lam_c(a), -a))
        step = min(b2 - b1 for b1, b2 in zip(alphas, alphas[1:]))
        lo_a, hi_a = max(alphas[0], best - step), min(alphas[-1], best + step)
        if hi_a > lo_a:
            optimize.minimize_scalar(
                lambda a: -lam_c(a), bounds=(lo_a, hi_a), method="bounded", options={"xatol": step / 8, "maxiter": 6}
            )
    points = [CurvePoint(a, v, v, v, (v,)) for a, v in sorted(cache.items())]
    return CapacityCurve(points)


def combine_curves(curves: Sequence[CapacityCurve]) -> CapacityCurve:
    """Pool per-network curves: mean with min/max over networks at each shared alpha."""
    if not curves:
        raise CapacityError("no curves to combine")
    shared = set.intersection(*({round(p.alpha, 6) for p in c.samples} for c in curves))
    points = []
    for a in sorted(shared):
        vals = tuple(next(p.lambda_c for p in c.samples if round(p.alpha, 6) == a) for c in curves)
        points.append(CurvePoint(a, float(np.mean(vals)), float(min(vals)), float(max(vals)), vals))
    return CapacityCurve(points)


def fit_bplus_exponent(bplus: Mapping[int, float]) -> FitResult:
    """Least-squares slope of ``log10 B+`` against ``log10 k``, one point per degree."""
    if len(bplus) < 3:
        raise CapacityError(f"need at least 3 distinct degrees to fit, got {len(bplus)}")
    k = np.array(list(bplus.keys()), dtype=np.float64)
    v = np.array(list(bplus.values()), dtype=np.float64)
    if np.any(k <= 0) or np.any(v <= 0):
        raise CapacityError("degrees and B+ values must be positive")
    res = stats.linregress(np.log10(k), np.log10(v))
    return FitResult(float(res.slope), float(res.intercept), float(res.rvalue**2), int(k.size))


def estimate_alpha_star(g: Graph, count_source: bool = True, b: np.ndarray | None = None) -> FitResult:
    """No-simulation estimate of the optimal exponent from the ``B+(k)`` fit.

    Degrees whose nodes never carry transit traffic (``B+ = 0``, possible
    only without the source term) are left out of the fit.
    """
    if b is None:
        b = betweenness(g, count_source=count_source)
    bplus = {k: v for k, v in b_plus_by_degree(g, b).items() if v > 0}
    return fit_bplus_exponent(bplus)


def with_threshold(search: LambdaSearchConfig, eta_threshold: float) -> LambdaSearchConfig:
    return replace(search, eta_threshold=eta_threshold)
