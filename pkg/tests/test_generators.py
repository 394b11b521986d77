import networkx as nx
import numpy as np
import pytest

from nodecap.generators import (
    GeneratorSpec,
    avg_clustering,
    avg_shortest_distance,
    generate_ba,
    generate_er,
    generate_pfp,
    local_clustering,
    pfp_weight,
    topology_stats,
)
from nodecap.graph import GraphError, from_edge_list, is_connected


def to_nx(g):
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.to_edge_list())
    return h


@pytest.mark.parametrize("n,l", [(50, 10), (50, 1000), (300, 900), (10, 45)])
def test_er_exact_link_count(n, l):
    g = generate_er(n, l, seed=3)
    assert g.n == n and g.n_edges == l


def test_er_rejects_too_many_links():
    with pytest.raises(GraphError):
        generate_er(5, 11, seed=0)


def test_er_is_uniform_over_pairs():
    # each of the 45 pairs of K10 should appear in about l/45 of the draws
    hits = np.zeros((10, 10))
    for seed in range(400):
        for u, v in generate_er(10, 9, seed).edges:
            hits[u, v] += 1
    counts = hits[np.triu_indices(10, 1)]
    expect = 400 * 9 / 45
    chi2 = ((counts - expect) ** 2 / expect).sum()
    assert chi2 < 80  # 44 dof, p ~ 1e-3


def test_ba_link_count_and_connectivity():
    g = generate_ba(500, 3, seed=1)
    assert g.n_edges == 3 + 3 * (500 - 3)
    assert is_connected(g)
    assert g.degrees.min() >= 3


def test_ba_degree_tail_is_heavy():
    g = generate_ba(4000, 3, seed=0)
    assert g.degrees.max() > 100


def test_pfp_basic_shape():
    g = generate_pfp(1000, seed=2)
    assert is_connected(g)
    # two links in the q mode, three otherwise
    assert 2.7 < g.n_edges / (g.n - 3) < 3.0
    assert avg_clustering(g) > 0.15


def test_pfp_weight():
    assert pfp_weight(1, 0.048) == pytest.approx(1.0)
    assert pfp_weight(10, 0.048) == pytest.approx(10 ** (1 + 0.048 * np.log10(10)))
    assert pfp_weight(10, 0.0) == pytest.approx(10.0)


@pytest.mark.parametrize(
    "spec",
    [GeneratorSpec("er", 200, seed=5, l=600), GeneratorSpec("ba", 200, seed=5), GeneratorSpec("pfp", 200, seed=5)],
)
def test_generators_are_deterministic(spec):
    assert spec.build() == spec.build()
    assert spec.build() != GeneratorSpec(spec.model, spec.n, seed=6, l=spec.l).build()


def test_spec_validation():
    with pytest.raises(GraphError):
        GeneratorSpec("ws", 100)
    with pytest.raises(GraphError):
        GeneratorSpec("er", 100)
    with pytest.raises(GraphError):
        GeneratorSpec("pfp", 100, p=0.8, q=0.3)


def test_statistics_against_networkx():
    g = generate_pfp(300, seed=4)
    h = to_nx(g)
    assert avg_clustering(g) == pytest.approx(nx.average_clustering(h), abs=1e-12)
    np.testing.assert_allclose(local_clustering(g), [nx.clustering(h, i) for i in range(g.n)], atol=1e-12)
    assert avg_shortest_distance(g) == pytest.approx(nx.average_shortest_path_length(h), rel=1e-12)


def test_topology_stats_small_cases():
    tri = from_edge_list([(0, 1), (1, 2), (0, 2)])
    s = topology_stats(tri)
    assert (s["nodes"], s["links"], s["max_degree"]) == (3, 3, 2)
    assert s["avg_distance"] == 1.0 and s["avg_clustering"] == 1.0
    path = from_edge_list([(0, 1), (1, 2)])
    assert topology_stats(path)["avg_distance"] == pytest.approx(8 / 6)
    assert topology_stats(path)["avg_clustering"] == 0.0
