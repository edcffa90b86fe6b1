"""Transductive graph-based classifiers: GFHF, LGC, Laplacian Eigenmaps, GTAM.

Every classifier maps ``(graph, LabelState)`` to a :class:`ScoreMatrix`;
:func:`predict` turns scores into hard labels.

Vertices without edges never take part in propagation.  Together with the
vertices of connected components that hold no label at all they are
decided at prediction time: an isolated labelled vertex keeps its observed
label, everything else unreachable gets the most frequent observed label.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import sparse

from .graph import AffinityGraph, laplacian
from .numerics import SPDFactor, least_squares, smallest_eigenpairs

__all__ = [
    "LabelState",
    "ScoreMatrix",
    "one_hot",
    "gfhf",
    "lgc",
    "laplacian_eigenmaps",
    "resolve_eigen_count",
    "gtam",
    "gtam_target",
    "gtam_objective",
    "predict",
    "unreachable_mask",
    "accuracy",
]

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 10000


@dataclass(frozen=True, eq=False)
class LabelState:
    """Observed labels of a transductive problem.

    Attributes
    ----------
    observed : ndarray of int, shape (n,)
        Observed class per instance, ``-1`` where unlabelled.
    class_count : int
    flip_record : ndarray of int
        Sorted ids of labelled instances whose observed label was corrupted.
    """

    observed: np.ndarray
    class_count: int
    flip_record: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))

    def __post_init__(self):
        obs = np.array(self.observed, dtype=np.int64, copy=True)
        flips = np.unique(np.asarray(self.flip_record, dtype=np.int64))
        c = int(self.class_count)
        if obs.ndim != 1:
            raise ValueError("observed must be one-dimensional")
        if c < 2:
            raise ValueError("class_count must be at least 2")
        if obs.max(initial=-1) >= c or obs.min(initial=-1) < -1:
            raise ValueError("observed labels must be -1 or lie in 0..class_count-1")
        if not np.any(obs >= 0):
            raise ValueError("at least one instance must be labelled")
        if flips.size and (flips.min() < 0 or flips.max() >= obs.size or np.any(obs[flips] < 0)):
            raise ValueError("flip_record must only reference labelled instances")
        obs.setflags(write=False)
        flips.setflags(write=False)
        object.__setattr__(self, "observed", obs)
        object.__setattr__(self, "flip_record", flips)
        object.__setattr__(self, "class_count", c)

    @classmethod
    def from_labels(cls, n, indices, labels, class_count, flip_record=()):
        obs = np.full(n, -1, dtype=np.int64)
        obs[np.asarray(indices, dtype=np.int64)] = labels
        return cls(obs, class_count, np.asarray(flip_record, dtype=np.int64))

    @property
    def n(self) -> int:
        return self.observed.size

    @property
    def labeled_mask(self) -> np.ndarray:
        return self.observed >= 0

    @property
    def labeled(self) -> np.ndarray:
        return np.flatnonzero(self.observed >= 0)

    @property
    def unlabeled(self) -> np.ndarray:
        return np.flatnonzero(self.observed < 0)

    def majority_label(self) -> int:
        counts = np.bincount(self.observed[self.labeled], minlength=self.class_count)
        return int(np.argmax(counts))

    def permuted(self, perm) -> "LabelState":
        """State for the vertex order ``perm`` (new vertex i = old perm[i])."""
        perm = np.asarray(perm)
        inverse = np.argsort(perm)
        return LabelState(self.observed[perm], self.class_count, inverse[self.flip_record])


@dataclass(frozen=True, eq=False)
class ScoreMatrix:
    """Real-valued class scores, one row per vertex, plus solver details."""

    scores: np.ndarray
    info: dict = field(default_factory=dict)

    def __post_init__(self):
        if not np.all(np.isfinite(self.scores)):
            raise ValueError("scores contain non-finite values")

    @property
    def shape(self):
        return self.scores.shape


def one_hot(state: LabelState, classes: int | None = None) -> np.ndarray:
    c = state.class_count if classes is None else classes
    Y = np.zeros((state.n, c))
    lab = state.labeled
    Y[lab, state.observed[lab]] = 1.0
    return Y


def unreachable_mask(graph: AffinityGraph, state: LabelState) -> np.ndarray:
    """Vertices in connected components that contain no labelled vertex."""
    comp = graph.components()
    return ~np.isin(comp, comp[state.labeled_mask])


def _check(graph, state):
    if graph.n != state.n:
        raise ValueError(f"graph has {graph.n} vertices but the label state has {state.n}")


def _iterate(step, F, tol, max_iter):
    for it in range(1, max_iter + 1):
        F_new = step(F)
        change = np.abs(F_new - F).max(initial=0.0)
        F = F_new
        if change < tol:
            return F, it, True
    return F, max_iter, False


def gfhf(graph: AffinityGraph, state: LabelState, mode: str = "closed",
         tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ScoreMatrix:
    """Gaussian fields and harmonic functions.

    ``mode="iterative"`` repeats ``F <- P F`` with the labelled rows reset
    to their one-hot labels; ``mode="closed"`` solves the harmonic system
    ``L_uu F_u = W_ul Y_l``.  Unlabelled vertices in components without any
    label keep zero scores and are reported in ``info["unreachable"]``.
    """
    _check(graph, state)
    Y = one_hot(state)
    lab = state.labeled_mask
    unreachable = unreachable_mask(graph, state)
    info = {"mode": mode, "unreachable": unreachable}

    if mode == "iterative":
        P = laplacian(graph, "row")
        Yl = Y[lab]

        def step(F):
            F = P @ F
            F[lab] = Yl
            return F

        F, it, ok = _iterate(step, Y, tol, max_iter)
        info.update(iterations=it, converged=ok)
    elif mode == "closed":
        F = Y.copy()
        u = np.flatnonzero(~lab & ~unreachable)
        if u.size:
            W = graph.weights
            L_uu = laplacian(graph)[u][:, u]
            rhs = W[u][:, np.flatnonzero(lab)] @ Y[lab]
            F[u] = SPDFactor(L_uu).solve(rhs)
        info.update(iterations=0, converged=True)
    else:
        raise ValueError(f"mode must be 'iterative' or 'closed', got {mode!r}")
    return ScoreMatrix(F, info)


def lgc(graph: AffinityGraph, state: LabelState, alpha: float = 0.9, mode: str = "closed",
        tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> ScoreMatrix:
    """Local and global consistency.

    Fixed point of ``F = alpha S F + (1 - alpha) Y`` with
    ``S = D^-1/2 W D^-1/2``; ``mode="closed"`` solves
    ``(I - alpha S) F = (1 - alpha) Y`` with a factorization cached per
    graph and alpha.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    _check(graph, state)
    Y = one_hot(state)
    info = {"mode": mode, "alpha": alpha, "unreachable": unreachable_mask(graph, state)}
    if mode == "iterative":
        S = laplacian(graph, "sym")
        base = (1.0 - alpha) * Y
        F, it, ok = _iterate(lambda F: alpha * (S @ F) + base, Y, tol, max_iter)
        info.update(iterations=it, converged=ok)
    elif mode == "closed":
        def factor():
            S = laplacian(graph, "sym")
            return SPDFactor(sparse.identity(graph.n) - alpha * S)
        F = graph.cached(("lgc", float(alpha)), factor).solve((1.0 - alpha) * Y)
        info.update(iterations=0, converged=True)
    else:
        raise ValueError(f"mode must be 'iterative' or 'closed', got {mode!r}")
    return ScoreMatrix(F, info)


def _round_half_up(x):
    return int(math.floor(x + 0.5 + 1e-9))


def resolve_eigen_count(p, n_labeled: int, n: int) -> int:
    """Number of eigenfunctions to fit.

    An integer ``p`` is a count in ``1..n``.  A fraction in (0, 1) is taken
    relative to the number of labelled vertices, so fewer labels fit fewer
    (smoother) eigenfunctions.
    """
    if isinstance(p, float) and 0.0 < p < 1.0:
        return min(n, max(1, _round_half_up(p * n_labeled)))
    if p != int(p) or not 1 <= int(p) <= n:
        raise ValueError(f"p must be a count in 1..{n} or a fraction in (0, 1), got {p}")
    return int(p)


def _active(graph):
    """Non-isolated vertices and the graph induced on them (cached)."""
    def compute():
        idx = np.flatnonzero(~graph.isolated)
        if idx.size == graph.n:
            return idx, graph
        return idx, graph.subgraph(idx)
    return graph.cached("active", compute)


def _component_eigenpairs(graph, comp, members, p):
    """``p`` smallest eigenpairs of L on one connected component (cached)."""
    key = ("le_eig", int(comp))
    with graph._lock:
        eig = graph._cache.get(key)
        if eig is None or eig.p < p:
            sub = graph.subgraph(members)
            eig = smallest_eigenpairs(laplacian(sub), p)
            graph._cache[key] = eig
    return eig.head(p)


def _reachable_eigenpairs(graph, state, p):
    """Smoothest eigenfunctions of L restricted to the labelled components.

    L is block diagonal over connected components, so its spectrum is the
    union of the per-component spectra.  Components without a label (and
    isolated vertices) would only contribute columns that vanish on every
    labelled row, so they are left out.  Eigenvalues within 1e-10 of zero
    are treated as ties and ordered by component id.
    """
    comp = graph.components()
    lab_comps = np.unique(comp[state.labeled])
    active = [c for c in lab_comps if np.count_nonzero(comp == c) > 1]
    values, blocks = [], []
    for c in active:
        members = np.flatnonzero(comp == c)
        eig = _component_eigenpairs(graph, c, members, min(p, members.size))
        values.append(eig.values)
        blocks.append((members, eig.vectors))
    if not values:
        return np.empty(0), np.zeros((graph.n, 0))
    vals = np.concatenate(values)
    ranked = np.where(np.abs(vals) < 1e-10, 0.0, vals)
    order = np.argsort(ranked, kind="stable")[:p]
    V = np.zeros((graph.n, vals.size))
    col = 0
    for members, vecs in blocks:
        V[members, col:col + vecs.shape[1]] = vecs
        col += vecs.shape[1]
    return vals[order], V[:, order]


def laplacian_eigenmaps(graph: AffinityGraph, state: LabelState, p=0.2) -> ScoreMatrix:
    """Least-squares fit of the labels on the ``p`` smoothest Laplacian eigenvectors.

    Eigenvectors are taken over the connected components that hold at least
    one label.  Each class column is regressed on +1/-1 targets over the
    labelled vertices; rank deficiency (fewer labels than eigenvectors)
    resolves to the minimum-norm coefficients.  A fractional ``p`` is a
    share of the labelled count (see :func:`resolve_eigen_count`).
    """
    _check(graph, state)
    p = resolve_eigen_count(p, state.labeled.size, graph.n)
    values, V = _reachable_eigenpairs(graph, state, p)
    lab = state.labeled
    targets = 2.0 * one_hot(state)[lab] - 1.0
    if V.shape[1]:
        coef = least_squares(V[lab], targets)
    else:  # every label sits on an isolated vertex
        coef = np.zeros((0, state.class_count))
    F = V @ coef
    info = {"p": V.shape[1], "coefficients": coef, "eigenvalues": values,
            "unreachable": unreachable_mask(graph, state),
            "fit_residual": float(np.abs(V[lab] @ coef - targets).max())}
    return ScoreMatrix(F, info)


def gtam_target(Y, degree) -> np.ndarray:
    """Degree-weighted label matrix with unit column sums.

    Entry ``(i, j)`` is ``D_ii Y_ij / sum_k D_kk Y_kj``; columns without
    label mass stay zero.
    """
    Y = np.asarray(Y, dtype=float)
    weighted = np.asarray(degree, dtype=float)[:, None] * Y
    mass = weighted.sum(axis=0)
    out = np.zeros_like(weighted)
    nz = mass > 0
    out[:, nz] = weighted[:, nz] / mass[nz]
    return out


def gtam_objective(F, Y, graph: AffinityGraph, mu: float) -> float:
    """Bivariate cost ``1/2 tr(F' Lsym F + mu (F - Yt)'(F - Yt))``."""
    Ln = laplacian(graph, "normalized")
    diff = F - gtam_target(Y, graph.degree)
    return 0.5 * float(np.sum(F * (Ln @ F)) + mu * np.sum(diff * diff))


def _gtam_operators(graph, mu):
    """Cholesky factor of ``Lsym/mu + I``, its inverse and the greedy kernel.

    With ``P = (Lsym/mu + I)^-1`` the minimum over F of the cost is
    ``mu/2 sum_j y_j' B y_j / m_j^2`` where ``B = D (I - P) D`` and
    ``m_j`` is the degree mass of class j.
    """
    def compute():
        Ln = laplacian(graph, "normalized").toarray()
        factor = SPDFactor(Ln / mu + np.eye(graph.n))
        P = factor.solve(np.eye(graph.n))
        P = 0.5 * (P + P.T)
        d = graph.degree
        B = d[:, None] * (np.eye(graph.n) - P) * d[None, :]
        return factor, B
    return graph.cached(("gtam", float(mu)), compute)


def gtam(graph: AffinityGraph, state: LabelState, mu: float = 0.0101,
         max_steps: int | None = None) -> ScoreMatrix:
    """Graph transduction via alternating minimization.

    Greedy loop: with the current binary label matrix Y, the optimal scores
    are ``F* = (Lsym/mu + I)^-1 Yt`` where ``Yt`` is :func:`gtam_target`.
    Every (unlabelled vertex, class) pair is scored by the exact cost after
    adding that label, the cheapest is committed, and the loop continues
    until every vertex carries a label or ``max_steps`` is reached.

    ``info["augmented"]`` holds the final labels (``-1`` where still
    unlabelled), ``info["order"]`` the committed ``(vertex, class)`` pairs
    and ``info["objective"]`` the cost before the first and after every
    step.  Ties go to the lowest vertex id, then the lowest class.
    """
    if not mu > 0:
        raise ValueError(f"mu must be positive, got {mu}")
    _check(graph, state)
    c = state.class_count
    idx, sub = _active(graph)
    factor, B = _gtam_operators(sub, mu)
    d = sub.degree

    Y = one_hot(state)[idx]
    labeled = Y.any(axis=1)
    mass = d @ Y
    R = B @ Y
    q = np.einsum("ij,ij->j", Y, R)
    diagB = np.diag(B).copy()

    def cost_terms(q, mass):
        out = np.zeros_like(q)
        nz = mass > 0
        out[nz] = q[nz] / mass[nz] ** 2
        return out

    terms = cost_terms(q, mass)
    objective = [0.5 * mu * terms.sum()]
    order = []
    limit = np.inf if max_steps is None else max_steps
    while len(order) < limit and not labeled.all():
        cand = np.flatnonzero(~labeled)
        new_mass = mass[None, :] + d[cand, None]
        new_q = q[None, :] + 2.0 * R[cand] + diagB[cand, None]
        delta = 0.5 * mu * (new_q / new_mass ** 2 - terms[None, :])
        best = int(np.argmin(delta))
        row, j = divmod(best, c)
        i = cand[row]
        Y[i, j] = 1.0
        labeled[i] = True
        mass[j] = new_mass[row, j]
        q[j] = new_q[row, j]
        terms[j] = q[j] / mass[j] ** 2
        R[:, j] += B[i]
        objective.append(objective[-1] + float(delta[row, j]))
        order.append((int(idx[i]), int(j)))

    F_sub = factor.solve(gtam_target(Y, d))
    F = one_hot(state)
    F[idx] = F_sub
    augmented = state.observed.copy()
    augmented[idx] = np.where(labeled, Y.argmax(axis=1), -1)
    info = {"mu": mu, "augmented": augmented, "order": order, "objective": objective,
            "steps": len(order), "unreachable": unreachable_mask(graph, state)}
    return ScoreMatrix(F, info)


def predict(scores: ScoreMatrix, state: LabelState, graph: AffinityGraph) -> np.ndarray:
    """Row-wise argmax (ties to the lower class), then the isolated-vertex rule."""
    pred = np.argmax(scores.scores, axis=1)
    pred[unreachable_mask(graph, state)] = state.majority_label()
    keep = graph.isolated & state.labeled_mask
    pred[keep] = state.observed[keep]
    return pred


def accuracy(pred, truth, state: LabelState | None = None, scope: str = "unlabeled") -> float:
    """Fraction of correct predictions against clean ground truth."""
    pred = np.asarray(pred)
    truth = np.asarray(truth)
    if pred.shape != truth.shape:
        raise ValueError("pred and truth must have equal length")
    if scope == "all":
        mask = np.ones(pred.shape, dtype=bool)
    elif scope == "unlabeled":
        if state is None:
            raise ValueError("scope 'unlabeled' needs the label state")
        mask = ~state.labeled_mask
    else:
        raise ValueError(f"scope must be 'unlabeled' or 'all', got {scope!r}")
    if not mask.any():
        raise ValueError("accuracy scope is empty")
    return float(np.mean(pred[mask] == truth[mask]))
