import numpy as np
import pytest

from gsslnoise.graph import (
    AffinityGraph,
    GraphError,
    build_graph,
    knn_graph,
    knn_index,
    laplacian,
    mutual_knn_graph,
    pairwise_sq_euclidean,
    rbf_weights,
)

from conftest import graph_from_edges, path_graph, random_connected_graph


def test_sq_distance_example():
    assert pairwise_sq_euclidean([[0.0, 0.0], [3.0, 4.0]])[0, 1] == pytest.approx(25.0)


def test_sq_distance_loop_oracle(rng):
    X = rng.standard_normal((12, 5))
    ref = np.zeros((12, 12))
    for i in range(12):
        for j in range(12):
            ref[i, j] = sum((X[i, t] - X[j, t]) ** 2 for t in range(5))
    D = pairwise_sq_euclidean(X)
    np.testing.assert_allclose(D, ref, atol=1e-10)
    assert np.array_equal(D, D.T) and np.all(np.diag(D) == 0)


def test_sq_distance_rejects():
    with pytest.raises(GraphError):
        pairwise_sq_euclidean([[1.0, np.nan], [0.0, 0.0]])
    with pytest.raises(GraphError):
        pairwise_sq_euclidean([[1.0, 2.0]])


def test_collinear_knn_and_mutual():
    X = np.array([[0.0], [1.0], [3.0]])
    idx = knn_index(pairwise_sq_euclidean(X), 1)
    assert idx.ids[:, 0].tolist() == [1, 0, 1]
    g = mutual_knn_graph(idx)
    assert g.dense().tolist() == [[0, 1, 0], [1, 0, 0], [0, 0, 0]]
    assert g.isolated.tolist() == [False, False, True]
    assert knn_graph(idx).dense()[1, 2] == 1


def test_tie_break_by_vertex_id():
    # unit square corners: each vertex has two neighbours at exactly distance 1
    X = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [1.0, 1.0]])
    idx = knn_index(pairwise_sq_euclidean(X), 2)
    assert idx.ids.tolist() == [[1, 2], [0, 3], [0, 3], [1, 2]]
    assert knn_index(pairwise_sq_euclidean(X), 1).ids[:, 0].tolist() == [1, 0, 0, 1]


def test_full_k_gives_complete_graph(rng):
    g = build_graph(rng.standard_normal((7, 2)), k=6)
    W = g.dense()
    assert np.array_equal(W, 1 - np.eye(7))


def test_k_range():
    D = pairwise_sq_euclidean(np.eye(4))
    for k in (0, 4):
        with pytest.raises(GraphError):
            knn_index(D, k)


def test_rbf_weights():
    X = np.array([[0.0], [0.0], [2.0]])
    D = pairwise_sq_euclidean(X)
    g = knn_graph(knn_index(D, 2))
    w = rbf_weights(D, g, sigma=1.0).dense()
    assert w[0, 1] == pytest.approx(1.0)
    assert w[0, 2] == pytest.approx(np.exp(-4.0 / 2.0))
    # d = 2 sigma^2 gives exp(-1)
    assert rbf_weights(D, g, sigma=np.sqrt(2.0)).dense()[0, 2] == pytest.approx(np.exp(-1.0))
    # very wide kernel approaches constant weights
    np.testing.assert_allclose(rbf_weights(D, g, sigma=1e6).dense(), g.dense(), atol=1e-10)
    with pytest.raises(GraphError):
        rbf_weights(D, g, sigma=0.0)


def test_affinity_graph_validation():
    with pytest.raises(GraphError):
        AffinityGraph(np.array([[0.0, 1.0], [2.0, 0.0]]))
    with pytest.raises(GraphError):
        AffinityGraph(np.array([[0.0, -1.0], [-1.0, 0.0]]))
    g = AffinityGraph(np.array([[5.0, 1.0], [1.0, 0.0]]))
    assert g.dense()[0, 0] == 0 and g.degree.tolist() == [1.0, 1.0]


def test_triangle_laplacian():
    g = graph_from_edges(3, [(0, 1), (1, 2), (0, 2)])
    L = laplacian(g).toarray()
    np.testing.assert_array_equal(L, [[2, -1, -1], [-1, 2, -1], [-1, -1, 2]])


def test_quadratic_form_identity(rng):
    g = random_connected_graph(rng, 15, 3, weighted=True)
    L = laplacian(g)
    W = g.dense()
    for _ in range(5):
        x = rng.standard_normal(15)
        direct = 0.5 * sum(W[i, j] * (x[i] - x[j]) ** 2 for i in range(15) for j in range(15))
        assert x @ (L @ x) == pytest.approx(direct, rel=1e-10)


def test_path_row_normalized():
    P = laplacian(path_graph(3), "row").toarray()
    np.testing.assert_allclose(P[1], [0.5, 0.0, 0.5])
    np.testing.assert_allclose(P.sum(axis=1), 1.0)


def test_sym_and_normalized(rng):
    g = random_connected_graph(rng, 12, 3, weighted=True)
    S = laplacian(g, "sym").toarray()
    N = laplacian(g, "normalized").toarray()
    d = g.degree
    np.testing.assert_allclose(S, g.dense() / np.sqrt(np.outer(d, d)))
    np.testing.assert_allclose(N, np.eye(12) - S)
    ev = np.linalg.eigvalsh(N)
    assert ev.min() > -1e-10 and ev.max() < 2 + 1e-10


def test_isolated_vertex_rows_are_zero():
    g = graph_from_edges(3, [(0, 1)])
    assert np.all(laplacian(g, "row").toarray()[2] == 0)
    assert np.all(laplacian(g, "sym").toarray()[2] == 0)
    with pytest.raises(GraphError):
        laplacian(g, "random-walk")


@pytest.mark.parametrize("seed", range(5))
def test_laplacian_psd_and_kernel(seed):
    rng = np.random.default_rng(seed)
    g = build_graph(rng.standard_normal((40, 4)), k=3)
    L = laplacian(g).toarray()
    np.testing.assert_allclose(L.sum(axis=1), 0.0, atol=1e-12)
    ev = np.linalg.eigvalsh(L)
    assert ev.min() > -1e-10
    n_comp = np.unique(g.components()).size
    assert np.sum(np.abs(ev) < 1e-9) == n_comp


def test_mutual_subset_of_union(rng):
    X = rng.standard_normal((30, 3))
    m = build_graph(X, k=4, mutual=True).dense()
    u = build_graph(X, k=4, mutual=False).dense()
    assert np.all(m <= u)
    assert np.all(m == m.T) and np.all(u == u.T)


def test_permuted_and_subgraph(rng):
    g = random_connected_graph(rng, 10, 3, weighted=True)
    perm = rng.permutation(10)
    np.testing.assert_array_equal(g.permuted(perm).dense(), g.dense()[perm][:, perm])
    sub = g.subgraph([0, 3, 5])
    np.testing.assert_array_equal(sub.dense(), g.dense()[[0, 3, 5]][:, [0, 3, 5]])


def test_build_graph_rbf_needs_sigma(rng):
    with pytest.raises(GraphError):
        build_graph(rng.standard_normal((5, 2)), k=2, weights="rbf")
    g = build_graph(rng.standard_normal((5, 2)), k=2, weights="rbf", sigma=1.0)
    assert g.dense().max() <= 1.0
