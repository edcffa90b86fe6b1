"""Affinity graph construction and Laplacian operators."""

from __future__ import annotations

import threading
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse
from scipy.sparse import csgraph

__all__ = [
    "GraphError",
    "NeighborIndex",
    "AffinityGraph",
    "pairwise_sq_euclidean",
    "knn_index",
    "mutual_knn_graph",
    "knn_graph",
    "rbf_weights",
    "laplacian",
    "build_graph",
]


class GraphError(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class NeighborIndex:
    """k nearest neighbours of every vertex.

    ``ids[i]`` lists the neighbours of vertex ``i`` ordered by ascending
    squared distance (ties by vertex id); ``sq_dist[i]`` holds the matching
    distances.
    """

    ids: np.ndarray
    sq_dist: np.ndarray

    @property
    def n(self) -> int:
        return self.ids.shape[0]

    @property
    def k(self) -> int:
        return self.ids.shape[1]


@dataclass(frozen=True, eq=False)
class AffinityGraph:
    """Symmetric nonnegative weight matrix with its degree vector.

    Derived operators (eigenpairs, factorizations) are memoised in a
    private per-graph cache so that a graph reused across experiment cells
    is only decomposed once.
    """

    weights: sparse.csr_matrix
    degree: np.ndarray = None
    _cache: dict = field(default_factory=dict, repr=False, compare=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, repr=False, compare=False)

    def __post_init__(self):
        W = sparse.csr_matrix(self.weights, dtype=float, copy=True)
        if W.shape[0] != W.shape[1]:
            raise GraphError("weight matrix must be square")
        W.setdiag(0.0)
        W.eliminate_zeros()
        W.sort_indices()
        if W.nnz and W.data.min() < 0:
            raise GraphError("weights must be nonnegative")
        if not np.all(np.isfinite(W.data)):
            raise GraphError("weights must be finite")
        if abs(W - W.T).max() if W.nnz else 0.0:
            raise GraphError("weight matrix must be symmetric")
        degree = np.asarray(W.sum(axis=1)).ravel()
        degree.setflags(write=False)
        object.__setattr__(self, "weights", W)
        object.__setattr__(self, "degree", degree)

    @property
    def n(self) -> int:
        return self.weights.shape[0]

    @property
    def isolated(self) -> np.ndarray:
        return self.degree <= 0

    def components(self):
        """Connected component label of every vertex."""
        return self.cached("components", lambda: csgraph.connected_components(
            self.weights, directed=False)[1])

    def cached(self, key, compute):
        with self._lock:
            if key not in self._cache:
                self._cache[key] = compute()
            return self._cache[key]

    def subgraph(self, vertices) -> "AffinityGraph":
        vertices = np.asarray(vertices)
        return AffinityGraph(self.weights[vertices][:, vertices])

    def permuted(self, perm) -> "AffinityGraph":
        """Graph whose vertex ``i`` is vertex ``perm[i]`` of this graph."""
        return self.subgraph(np.asarray(perm))

    def dense(self) -> np.ndarray:
        return self.weights.toarray()


def pairwise_sq_euclidean(features) -> np.ndarray:
    X = np.asarray(features, dtype=float)
    if X.ndim != 2 or X.shape[0] < 2:
        raise GraphError("need a 2-d feature matrix with at least 2 rows")
    if not np.all(np.isfinite(X)):
        raise GraphError("features contain non-finite values")
    sq = np.einsum("ij,ij->i", X, X)
    dist = sq[:, None] + sq[None, :] - 2.0 * (X @ X.T)
    # the expansion loses symmetry and can dip below zero by rounding
    dist = 0.5 * (dist + dist.T)
    np.maximum(dist, 0.0, out=dist)
    np.fill_diagonal(dist, 0.0)
    return dist


def knn_index(dist, k: int) -> NeighborIndex:
    """k nearest other vertices per row; ties go to the lower vertex id."""
    dist = np.asarray(dist, dtype=float)
    n = dist.shape[0]
    if dist.shape != (n, n):
        raise GraphError("distance matrix must be square")
    if not 1 <= k <= n - 1:
        raise GraphError(f"k must lie in 1..{n - 1}, got {k}")
    masked = dist.copy()
    np.fill_diagonal(masked, np.inf)
    # stable sort keeps ascending vertex id among equal distances
    ids = np.argsort(masked, axis=1, kind="stable")[:, :k]
    return NeighborIndex(ids, np.take_along_axis(dist, ids, axis=1))


def _knn_adjacency(index: NeighborIndex) -> sparse.csr_matrix:
    n, k = index.ids.shape
    rows = np.repeat(np.arange(n), k)
    return sparse.csr_matrix((np.ones(n * k), (rows, index.ids.ravel())), shape=(n, n))


def mutual_knn_graph(index: NeighborIndex) -> AffinityGraph:
    """Unit-weight edge wherever each endpoint is among the other's kNN."""
    A = _knn_adjacency(index)
    return AffinityGraph(A.multiply(A.T).tocsr())


def knn_graph(index: NeighborIndex) -> AffinityGraph:
    """Symmetrised (union) kNN graph with unit weights."""
    A = _knn_adjacency(index)
    return AffinityGraph(A.maximum(A.T).tocsr())


def rbf_weights(dist, graph: AffinityGraph, sigma: float) -> AffinityGraph:
    """Replace edge weights by ``exp(-d_ij / (2 sigma^2))`` on the same edge set."""
    if not sigma > 0:
        raise GraphError(f"sigma must be positive, got {sigma}")
    dist = np.asarray(dist, dtype=float)
    W = graph.weights.tocoo()
    vals = np.exp(-dist[W.row, W.col] / (2.0 * sigma * sigma))
    # an edge whose weight underflows would silently vanish from the edge set
    vals = np.maximum(vals, np.finfo(float).tiny)
    return AffinityGraph(sparse.csr_matrix((vals, (W.row, W.col)), shape=W.shape))


def _inv(values, power=1.0):
    out = np.zeros_like(values, dtype=float)
    pos = values > 0
    out[pos] = values[pos] ** -power
    return out


def laplacian(graph: AffinityGraph, kind: str = "unnormalized") -> sparse.csr_matrix:
    """Graph Laplacian or normalised propagation operator.

    kind
        ``"unnormalized"``: L = D - W.
        ``"sym"``: S = D^-1/2 W D^-1/2.
        ``"row"``: P = D^-1 W.
        ``"normalized"``: I - S, the symmetric normalised Laplacian.

    Isolated vertices get zero rows (and columns) in S and P instead of a
    division by zero.
    """
    W, deg = graph.weights, graph.degree
    if kind == "unnormalized":
        return (sparse.diags(deg) - W).tocsr()
    if kind == "row":
        return (sparse.diags(_inv(deg)) @ W).tocsr()
    if kind in ("sym", "normalized"):
        half = sparse.diags(_inv(deg, 0.5))
        S = (half @ W @ half).tocsr()
        if kind == "sym":
            return S
        return (sparse.identity(graph.n, format="csr") - S).tocsr()
    raise GraphError(f"unknown Laplacian kind {kind!r}")


def build_graph(features, k: int = 15, weights: str = "constant", sigma: float | None = None,
                mutual: bool = True) -> AffinityGraph:
    """Features to affinity graph: distances, kNN, mutual filtering, weighting."""
    dist = pairwise_sq_euclidean(features)
    index = knn_index(dist, k)
    g = mutual_knn_graph(index) if mutual else knn_graph(index)
    if weights == "constant":
        return g
    if weights == "rbf":
        if sigma is None:
            raise GraphError("rbf weights need sigma")
        return rbf_weights(dist, g, sigma)
    raise GraphError(f"unknown weighting {weights!r}")
