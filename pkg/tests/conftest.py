import time

import numpy as np
import pytest
from scipy import sparse

from gsslnoise.graph import AffinityGraph, build_graph

# acceptance outcomes, printed once at the end of the session
ACCEPTANCE = {}


def record_criterion(number, passed, detail=""):
    ACCEPTANCE[number] = (bool(passed), detail)
    return passed


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[number]
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'}" + (f"  {detail}" if detail else ""))


def graph_from_edges(n, edges, weights=None):
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    w = np.ones(len(edges)) if weights is None else np.asarray(weights, dtype=float)
    W = sparse.coo_matrix((w, (edges[:, 0], edges[:, 1])), shape=(n, n))
    return AffinityGraph((W + W.T).tocsr())


def path_graph(n):
    return graph_from_edges(n, [(i, i + 1) for i in range(n - 1)])


def complete_graph(n):
    return graph_from_edges(n, [(i, j) for i in range(n) for j in range(i + 1, n)])


def two_triangles():
    """Vertices 0-2 and 3-5 form two disjoint triangles."""
    return graph_from_edges(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)])


def random_connected_graph(rng, n, k, mutual=False, weighted=False):
    """kNN graph on Gaussian points, redrawn until connected."""
    while True:
        X = rng.standard_normal((n, 3))
        g = build_graph(X, k=k, mutual=mutual)
        if np.all(g.components() == 0):
            break
    if weighted:
        # random positive weights on the same edges remove argmax ties
        W = sparse.triu(g.weights, 1).tocoo()
        vals = rng.uniform(0.5, 2.0, size=W.nnz)
        U = sparse.coo_matrix((vals, (W.row, W.col)), shape=W.shape)
        g = AffinityGraph((U + U.T).tocsr())
    return g


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


# shared experiment grids (expensive; each runs once per session)

@pytest.fixture(scope="session")
def g241c_default_grid():
    from gsslnoise.bench import GridConfig, run_grid

    config = GridConfig()
    start = time.perf_counter()
    records = run_grid(config)
    return config, records, time.perf_counter() - start


@pytest.fixture(scope="session")
def digit1_grid():
    from gsslnoise.bench import DatasetSpec, GridConfig, run_grid

    config = GridConfig(datasets=(DatasetSpec("digit1"),), label_fractions=(0.10, 0.01))
    return config, run_grid(config)
