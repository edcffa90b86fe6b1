"""Fast invariant checks behind ``gsslnoise verify``.

Each check runs on a handful of small random problems and prints one
``PASS``/``FAIL`` line.  The full suites live in the test directory.
"""

from __future__ import annotations

import numpy as np

from .algorithms import LabelState, gfhf, gtam, gtam_target, lgc, one_hot
from .bench.grid import AffinitySpec, AlgorithmSpec, DatasetSpec, GridConfig, run_grid
from .graph import build_graph, laplacian

__all__ = ["run_checks", "random_problem"]


def random_problem(rng, n=30, d=3, k=5, classes=2):
    """Connected union-kNN graph on Gaussian blobs plus one label per class and a few more."""
    while True:
        X = rng.standard_normal((n, d))
        graph = build_graph(X, k=k, mutual=False)
        if np.all(graph.components() == 0):
            break
    labels = np.arange(classes).tolist() + rng.integers(0, classes, size=3).tolist()
    idx = rng.choice(n, size=len(labels), replace=False)
    return graph, LabelState.from_labels(n, idx, labels, classes)


def _laplacian_ok(graph):
    L = laplacian(graph).toarray()
    return (np.abs(L.sum(axis=1)).max() < 1e-10
            and np.linalg.eigvalsh(L).min() > -1e-9)


def _gfhf_ok(graph, state):
    F = gfhf(graph, state).scores
    P = laplacian(graph, "row")
    u = state.unlabeled
    harmonic = np.abs((P @ F)[u] - F[u]).max() < 1e-8
    bounded = F.min() >= -1e-12 and F.max() <= 1 + 1e-12
    return harmonic and bounded


def _lgc_ok(graph, state, alpha=0.9):
    F = lgc(graph, state, alpha=alpha).scores
    S = laplacian(graph, "sym")
    return np.abs(alpha * (S @ F) + (1 - alpha) * one_hot(state) - F).max() < 1e-8


def _gtam_ok(graph, state, mu=0.0101):
    res = gtam(graph, state, mu=mu)
    steps_ok = np.all(np.diff(res.info["objective"]) <= 1e-9)
    Yt = gtam_target(one_hot(state), graph.degree)
    return steps_ok and np.allclose(Yt.sum(axis=0), 1.0)


def _cell_count_ok(rng):
    """The configured product equals the number of records a run returns."""
    cfg = GridConfig(
        seeds=tuple(range(int(rng.integers(1, 3)))),
        datasets=(DatasetSpec("g241c", 12, 2), DatasetSpec("digit1", 12, 6))[: int(rng.integers(1, 3))],
        label_fractions=(0.5, 0.25)[: int(rng.integers(1, 3))],
        noise_rates=(0.0, 0.1, 0.2)[: int(rng.integers(1, 4))],
        affinities=(AffinitySpec(k=3, mutual=False),),
        algorithms=(AlgorithmSpec("gfhf"), AlgorithmSpec("lgc", alpha=0.9)),
    )
    expected = (len(cfg.seeds) * len(cfg.datasets) * len(cfg.label_fractions)
                * len(cfg.noise_rates) * len(cfg.affinities) * len(cfg.algorithms))
    return cfg.cell_count == expected == len(run_grid(cfg))


def run_checks(seed: int = 0, instances: int = 5, out=print) -> bool:
    rng = np.random.default_rng(seed)
    problems = [random_problem(rng) for _ in range(instances)]
    checks = {
        "laplacian PSD and zero row sums": lambda: all(_laplacian_ok(g) for g, _ in problems),
        "GFHF harmonic and bounded": lambda: all(_gfhf_ok(g, s) for g, s in problems),
        "LGC fixed point": lambda: all(_lgc_ok(g, s) for g, s in problems),
        "GTAM monotone cost (mu=0.0101), unit target columns": lambda: all(_gtam_ok(g, s) for g, s in problems),
        "grid cell count equals records run": lambda: all(_cell_count_ok(rng) for _ in range(instances)),
    }
    ok = True
    for name, check in checks.items():
        try:
            passed = bool(check())
        except Exception as exc:  # noqa: BLE001
            passed = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        ok &= passed
        out(f"{'PASS' if passed else 'FAIL'} {name}")
    return ok
