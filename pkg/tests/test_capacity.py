import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodecap.allocation import allocate, allocate_betweenness, allocate_uniform
from nodecap.capacity import (
    CapacityCurve,
    CapacityError,
    CurvePoint,
    LambdaSearchConfig,
    analytical_lambda_c,
    bisect_threshold,
    combine_curves,
    estimate_alpha_star,
    find_lambda_c,
    fit_bplus_exponent,
    measure_eta,
    sweep_alpha,
)
from nodecap.generators import generate_ba
from nodecap.graph import from_edge_list
from nodecap.paths import all_pairs, betweenness

P3 = from_edge_list([(0, 1), (1, 2)])
STAR = from_edge_list([(0, 1), (0, 2), (0, 3)])
FAST = LambdaSearchConfig(steps=1500, transient=500, window=100)


def test_analytical_hand_cases():
    assert analytical_lambda_c(allocate_uniform(P3), betweenness(P3), 3) == (2.0, 1)
    value, _ = analytical_lambda_c(np.array([3.0, 1, 1, 1]), betweenness(STAR), 4)
    assert value == pytest.approx(4.0)
    with pytest.raises(CapacityError, match="zero betweenness"):
        analytical_lambda_c(np.ones(3), betweenness(P3, count_source=False), 3)
    assert analytical_lambda_c(np.ones(3), betweenness(P3, count_source=False), 3, skip_idle=True) == (3.0, 1)
    with pytest.raises(CapacityError):
        analytical_lambda_c(np.ones(2), np.ones(3), 3)


def test_proportional_allocation_flattens_the_estimator():
    g = generate_ba(200, 2, seed=3)
    b = betweenness(g)
    cap = allocate_betweenness(g, b)
    ratio = cap * g.n * (g.n - 1) / b
    assert np.ptp(ratio) <= 1e-9 * ratio.mean()
    value, _ = analytical_lambda_c(cap, b, g.n)
    assert value == pytest.approx(2 * g.n_edges * g.n * (g.n - 1) / b.sum(), rel=1e-12)


@settings(max_examples=60, deadline=None)
@given(st.integers(2, 5000), st.integers(1, 40), st.integers(2, 80))
def test_bisection_finds_a_step_threshold(true_c, lo, width):
    def eta(lam):
        return 0.0 if lam <= true_c else 0.5

    res = bisect_threshold(eta, 0.01, lo, lo + width, resolution=0.0)
    assert res.lambda_c == true_c and res.upper == true_c + 1
    assert all((e < 0.01) == (x <= true_c) for x, e in res.probes)


def test_bisection_respects_resolution():
    res = bisect_threshold(lambda lam: 0.0 if lam <= 1234 else 1.0, 0.01, 1000, 2000, resolution=0.02)
    assert res.lambda_c <= 1234 < res.upper
    assert res.upper - res.lambda_c <= 0.02 * res.lambda_c


def test_bisection_failure_sides():
    with pytest.raises(CapacityError, match="lower side"):
        bisect_threshold(lambda lam: 1.0, 0.01, 8, 16)
    with pytest.raises(CapacityError, match="upper side"):
        bisect_threshold(lambda lam: 0.0, 0.01, 8, 16, cap=100)


def test_search_config_validation():
    with pytest.raises(CapacityError):
        LambdaSearchConfig(eta_threshold=0)
    with pytest.raises(CapacityError):
        LambdaSearchConfig(lambda_lo=5, lambda_hi=5)
    with pytest.raises(CapacityError):
        LambdaSearchConfig(seeds=())


def test_p3_critical_rate():
    # the estimator gives 2; at lam=2 the center is exactly saturated
    search = LambdaSearchConfig(seeds=(0, 1, 2))
    res = find_lambda_c(P3, all_pairs(P3), allocate_uniform(P3), search, b=betweenness(P3))
    assert res.lambda_c in (1, 2) and res.upper in (2, 3)


def test_find_lambda_c_near_estimate():
    g = generate_ba(150, 3, seed=0)
    rs = all_pairs(g)
    b = betweenness(g)
    cap = allocate(g, "betweenness", b=b)
    est, _ = analytical_lambda_c(cap, b, g.n)
    res = find_lambda_c(g, rs, cap, FAST, b=b)
    assert 0.8 * est <= res.lambda_c <= 1.05 * est
    probed = dict(res.probes)
    assert probed[res.lambda_c] < FAST.eta_threshold <= probed[res.upper]
    # bracket from scratch agrees within resolution
    res2 = find_lambda_c(g, rs, cap, FAST)
    assert abs(res2.lambda_c - res.lambda_c) <= 0.05 * res.lambda_c


def test_eta_is_monotone_in_lambda():
    g = generate_ba(150, 3, seed=2)
    rs = all_pairs(g)
    b = betweenness(g)
    cap = allocate(g, "degree")
    est, _ = analytical_lambda_c(cap, b, g.n)
    search = LambdaSearchConfig(steps=2000, transient=500, seeds=(0, 1, 2, 3, 4))
    etas = [measure_eta(g, rs, cap, int(f * est), search) for f in (0.5, 0.9, 1.1, 1.3, 1.6, 2.0)]
    assert all(later >= earlier - 1e-4 for earlier, later in zip(etas, etas[1:]))
    assert etas[0] < 1e-3 < etas[-1]


def test_sweep_single_point_and_refine():
    g = generate_ba(80, 2, seed=1)
    rs = all_pairs(g)
    curve = sweep_alpha(g, rs, [0.0], FAST)
    assert len(curve.samples) == 1 and curve.alpha_star == 0.0
    refined = sweep_alpha(g, rs, [0.5, 1.0, 1.5], FAST, refine=True)
    alphas = [p.alpha for p in refined.samples]
    assert {0.5, 1.0, 1.5} <= set(alphas) and len(alphas) > 3
    with pytest.raises(CapacityError):
        sweep_alpha(g, rs, [], FAST)
    with pytest.raises(CapacityError):
        sweep_alpha(g, rs, [1.0, 0.5], FAST)


def test_curve_best_and_combination():
    a = CapacityCurve([CurvePoint(0.5, 10, 10, 10), CurvePoint(1.0, 20, 20, 20), CurvePoint(1.5, 20, 20, 20)])
    assert a.alpha_star == 1.0 and a.lambda_c_star == 20
    b = CapacityCurve([CurvePoint(0.5, 14, 14, 14), CurvePoint(1.0, 16, 16, 16), CurvePoint(2.0, 1, 1, 1)])
    c = combine_curves([a, b])
    assert [p.alpha for p in c.samples] == [0.5, 1.0]
    assert (c.samples[1].lambda_c, c.samples[1].lambda_min, c.samples[1].lambda_max) == (18, 16, 20)
    with pytest.raises(CapacityError):
        combine_curves([])


@pytest.mark.parametrize("beta", [0.5, 1.0, 1.3, 2.0])
def test_fit_recovers_exponent_and_ignores_scale(beta):
    k = np.arange(1, 101)
    fit = fit_bplus_exponent(dict(zip(k.tolist(), (7.0 * k**beta).tolist())))
    assert abs(fit.alpha_prime - beta) < 1e-9 and fit.r_squared == pytest.approx(1.0)
    scaled = fit_bplus_exponent(dict(zip(k.tolist(), (700.0 * k**beta).tolist())))
    assert scaled.alpha_prime == pytest.approx(fit.alpha_prime, abs=1e-12)
    assert scaled.intercept == pytest.approx(fit.intercept + 2, abs=1e-9)


def test_fit_errors():
    with pytest.raises(CapacityError, match="at least 3"):
        fit_bplus_exponent({1: 1.0, 2: 2.0})
    with pytest.raises(CapacityError):
        fit_bplus_exponent({1: 1.0, 2: 0.0, 3: 4.0})
    ring = from_edge_list([(i, (i + 1) % 10) for i in range(10)])
    with pytest.raises(CapacityError):
        estimate_alpha_star(ring)


def test_estimate_on_ba():
    g = generate_ba(1000, 3, seed=0)
    fit = estimate_alpha_star(g)
    assert 1.0 < fit.alpha_prime < 1.6
