import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from nodecap.allocation import (
    AllocationError,
    allocate,
    allocate_betweenness,
    allocate_degree_power,
    allocate_uniform,
    normalize,
)
from nodecap.generators import generate_ba
from nodecap.graph import from_edge_list
from nodecap.paths import betweenness

STAR = from_edge_list([(0, 1), (0, 2), (0, 3)])


def test_hand_values_on_star():
    np.testing.assert_allclose(allocate_uniform(STAR), [1.5] * 4)
    np.testing.assert_allclose(allocate_degree_power(STAR, 1.0), [3, 1, 1, 1])
    np.testing.assert_allclose(allocate_degree_power(STAR, 0.0), [1.5] * 4)
    # 3**2 : 1 : 1 : 1 scaled to 6
    np.testing.assert_allclose(allocate_degree_power(STAR, 2.0), [4.5, 0.5, 0.5, 0.5])
    np.testing.assert_allclose(allocate_betweenness(STAR, betweenness(STAR)), [3, 1, 1, 1])


@settings(max_examples=60, deadline=None)
@given(st.floats(-30, 30), st.integers(0, 1000))
def test_degree_power_budget_and_order(alpha, seed):
    g = generate_ba(60, 2, seed)
    cap = allocate_degree_power(g, alpha)
    assert cap.sum() == pytest.approx(2 * g.n_edges, rel=1e-9)
    assert np.all(cap >= 0)
    # capabilities are monotone in degree with the sign of alpha
    k = g.degrees
    hi, lo = int(np.argmax(k)), int(np.argmin(k))
    if alpha > 0:
        assert cap[hi] >= cap[lo]
    elif alpha < 0:
        assert cap[hi] <= cap[lo]


def test_huge_exponent_does_not_overflow():
    g = generate_ba(500, 3, seed=0)
    cap = allocate_degree_power(g, 400.0)
    assert np.isfinite(cap).all()
    assert cap.max() == pytest.approx(2 * g.n_edges / np.sum(g.degrees == g.degrees.max()))


def test_errors():
    with pytest.raises(AllocationError):
        allocate_degree_power(STAR, float("nan"))
    with pytest.raises(AllocationError, match="isolated"):
        allocate_degree_power(from_edge_list([(0, 1)], n=3), 1.0)
    with pytest.raises(AllocationError):
        allocate_betweenness(STAR, np.zeros(4))
    with pytest.raises(AllocationError):
        allocate_betweenness(STAR, np.ones(3))
    with pytest.raises(AllocationError):
        normalize(np.array([1.0, -1.0]), 2.0)
    with pytest.raises(AllocationError, match="unknown scheme"):
        allocate(STAR, "random")
    with pytest.raises(AllocationError, match="alpha"):
        allocate(STAR, "degree-power")


def test_dispatch():
    np.testing.assert_allclose(allocate(STAR, "degree"), allocate_degree_power(STAR, 1.0))
    np.testing.assert_allclose(allocate(STAR, "degree-power", alpha=1.5), allocate_degree_power(STAR, 1.5))
    np.testing.assert_allclose(allocate(STAR, "betweenness"), [3, 1, 1, 1])
    np.testing.assert_allclose(allocate(STAR, "uniform"), [1.5] * 4)


def test_interior_betweenness_gives_leaves_nothing():
    cap = allocate_betweenness(STAR, betweenness(STAR, count_source=False))
    np.testing.assert_allclose(cap, [6, 0, 0, 0])
