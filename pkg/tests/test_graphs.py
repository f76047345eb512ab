import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qconsensus import graphs
from qconsensus.errors import DisconnectedGraph, InvalidParams


def test_star_4_spectrum():
    g = graphs.preset_graph("star", 4)
    sp = graphs.build_laplacian(g)
    # brute-force oracle on the hand-built Laplacian
    lap = np.array([[3, -1, -1, -1], [-1, 1, 0, 0], [-1, 0, 1, 0], [-1, 0, 0, 1]], float)
    expected = np.sort(np.linalg.eigvalsh(lap))
    assert np.allclose(sp.eigenvalues, expected, atol=1e-10)
    assert np.allclose(sp.eigenvalues, [0.0, 1.0, 1.0, 4.0], atol=1e-10)


def test_two_node_line():
    g = graphs.graph_from_edges(2, [(0, 1, 1.0)])
    sp = graphs.build_laplacian(g)
    assert np.array_equal(sp.laplacian, np.array([[1.0, -1.0], [-1.0, 1.0]]))
    assert np.allclose(sp.eigenvalues, [0.0, 2.0], atol=1e-12)


def test_complete_4():
    sp = graphs.build_laplacian(graphs.preset_graph("complete", 4))
    assert np.allclose(sp.eigenvalues, [0.0, 4.0, 4.0, 4.0], atol=1e-10)


def test_connectivity_checks():
    assert graphs.check_connected(graphs.preset_graph("star", 4))
    empty = graphs.Graph(n_agents=4, adjacency=np.zeros((4, 4)))
    assert not graphs.check_connected(empty)
    two_pairs = graphs.graph_from_edges(4, [(0, 1, 1.0), (2, 3, 1.0)])
    assert not graphs.check_connected(two_pairs)
    with pytest.raises(DisconnectedGraph):
        graphs.build_laplacian(two_pairs)


def test_invalid_graphs_rejected():
    with pytest.raises(InvalidParams):
        graphs.Graph(n_agents=2, adjacency=np.array([[1.0, 1.0], [1.0, 0.0]]))
    with pytest.raises(InvalidParams):
        graphs.Graph(n_agents=2, adjacency=np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(InvalidParams):
        graphs.graph_from_edges(3, [(0, 0, 1.0)])
    with pytest.raises(InvalidParams):
        graphs.preset_graph("torus", 4)


def _random_connected(n: int, seed: int) -> graphs.Graph:
    rng = np.random.default_rng(seed)
    edges = [(i, int(rng.integers(0, i)), float(rng.uniform(0.5, 2.0)))
             for i in range(1, n)]  # random spanning tree
    extra = rng.integers(0, n * (n - 1) // 2 + 1)
    for _ in range(extra):
        i, j = rng.integers(0, n, size=2)
        if i != j:
            edges.append((int(i), int(j), float(rng.uniform(0.5, 2.0))))
    return graphs.graph_from_edges(n, edges)


@settings(max_examples=60, deadline=None)
@given(n=st.integers(2, 12), seed=st.integers(0, 10_000))
def test_diagonalizer_properties(n, seed):
    sp = graphs.build_laplacian(_random_connected(n, seed))
    u = sp.unitary
    assert np.abs(u.T @ u - np.eye(n)).max() <= 1e-12
    recon = u.T @ sp.laplacian @ u
    assert np.abs(recon - np.diag(sp.eigenvalues)).max() <= 1e-10
    assert np.abs(u[:, 0] - 1.0 / np.sqrt(n)).max() <= 1e-12
    assert sp.eigenvalues[0] == 0.0
    assert sp.lambda2 > 1e-10
    # rows of the Laplacian sum to zero exactly for representable weights
    assert np.abs(sp.laplacian.sum(axis=1)).max() == pytest.approx(0.0, abs=1e-13)


def test_row_sums_exact_for_integer_weights():
    sp = graphs.build_laplacian(graphs.preset_graph("ring", 6))
    assert np.all(sp.laplacian.sum(axis=1) == 0.0)
