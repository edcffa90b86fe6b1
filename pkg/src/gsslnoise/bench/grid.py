"""Experiment grid: configuration product, cell execution and records."""

from __future__ import annotations

import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, fields
from itertools import product

import numpy as np

from .. import algorithms as alg
from ..datasets import LabeledDataset, make_dataset
from ..graph import AffinityGraph, build_graph
from ..noise import NoiseSpec, make_label_state

log = logging.getLogger(__name__)

__all__ = [
    "ConfigError",
    "DatasetSpec",
    "AffinitySpec",
    "AlgorithmSpec",
    "GridConfig",
    "ExperimentRecord",
    "DEFAULT_ALGORITHMS",
    "DEFAULT_LABEL_FRACTIONS",
    "DEFAULT_NOISE_RATES",
    "ALGORITHM_ORDER",
    "run_grid",
    "sort_records",
    "accuracies",
]

ALGORITHM_ORDER = ("gfhf", "gtam", "lgc", "le")
DEFAULT_LABEL_FRACTIONS = (0.10, 0.05, 0.025, 0.01)
DEFAULT_NOISE_RATES = (0.0, 0.05, 0.10, 0.20, 0.35)


class ConfigError(ValueError):
    """Invalid grid configuration; raised before any cell runs."""


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    n: int = 1500
    d: int = 241

    def load(self, seed: int) -> LabeledDataset:
        return make_dataset(self.name, seed, n=self.n, d=self.d)


@dataclass(frozen=True)
class AffinitySpec:
    k: int = 15
    weights: str = "constant"
    sigma: float | None = None
    mutual: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError(f"k must be positive, got {self.k}")
        if self.weights not in ("constant", "rbf"):
            raise ConfigError(f"unknown weighting {self.weights!r}")
        if self.weights == "rbf" and not (self.sigma and self.sigma > 0):
            raise ConfigError("rbf weights need a positive sigma")

    @property
    def label(self) -> str:
        kind = "mknn" if self.mutual else "knn"
        extra = "" if self.weights == "constant" else f",rbf={self.sigma:g}"
        return f"{kind}(k={self.k}{extra})"

    def build(self, dataset: LabeledDataset) -> AffinityGraph:
        return build_graph(dataset.features, self.k, self.weights, self.sigma, self.mutual)


@dataclass(frozen=True)
class AlgorithmSpec:
    """A classifier with its hyperparameters (``mu`` is GTAM's trade-off)."""

    name: str
    alpha: float | None = None
    mu: float | None = None
    p: float | None = None

    def __post_init__(self):
        if self.name not in ALGORITHM_ORDER:
            raise ConfigError(f"unknown algorithm {self.name!r}; expected one of {ALGORITHM_ORDER}")
        need = {"gfhf": (), "lgc": ("alpha",), "gtam": ("mu",), "le": ("p",)}[self.name]
        for hp in ("alpha", "mu", "p"):
            value = getattr(self, hp)
            if hp in need and value is None:
                raise ConfigError(f"{self.name} needs {hp}")
            if hp not in need and value is not None:
                raise ConfigError(f"{self.name} takes no {hp}")
        if self.alpha is not None and not 0 < self.alpha < 1:
            raise ConfigError(f"alpha must lie in (0, 1), got {self.alpha}")
        if self.mu is not None and not self.mu > 0:
            raise ConfigError(f"mu must be positive, got {self.mu}")
        if self.p is not None and not self.p > 0:
            raise ConfigError(f"p must be positive, got {self.p}")

    @property
    def label(self) -> str:
        hp = [f"{k}={getattr(self, k):g}" for k in ("alpha", "mu", "p") if getattr(self, k) is not None]
        return self.name.upper() + (f"({','.join(hp)})" if hp else "")

    def sort_key(self):
        return (ALGORITHM_ORDER.index(self.name),
                *(-math.inf if getattr(self, k) is None else getattr(self, k)
                  for k in ("alpha", "mu", "p")))

    def run(self, graph: AffinityGraph, state: alg.LabelState) -> alg.ScoreMatrix:
        if self.name == "gfhf":
            return alg.gfhf(graph, state)
        if self.name == "lgc":
            return alg.lgc(graph, state, self.alpha)
        if self.name == "gtam":
            return alg.gtam(graph, state, self.mu)
        p = self.p if self.p < 1 else int(self.p)
        return alg.laplacian_eigenmaps(graph, state, p)


DEFAULT_ALGORITHMS = (
    AlgorithmSpec("gfhf"),
    AlgorithmSpec("gtam", mu=0.0101),
    AlgorithmSpec("gtam", mu=99.0),
    AlgorithmSpec("lgc", alpha=0.1),
    AlgorithmSpec("lgc", alpha=0.9),
    AlgorithmSpec("le", p=0.2),
)


@dataclass(frozen=True)
class GridConfig:
    """Cartesian grid of seeds x datasets x label fractions x noise rates x
    affinities x algorithms.

    ``seed_root`` seeds the dataset generators; the per-cell ``seeds``
    drive label sampling and corruption.
    """

    seeds: tuple = tuple(range(20))
    datasets: tuple = (DatasetSpec("g241c"),)
    label_fractions: tuple = DEFAULT_LABEL_FRACTIONS
    noise_rates: tuple = DEFAULT_NOISE_RATES
    affinities: tuple = (AffinitySpec(),)
    algorithms: tuple = DEFAULT_ALGORITHMS
    seed_root: int = 0
    workers: int = 1

    def __post_init__(self):
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, list):
                object.__setattr__(self, f.name, tuple(value))
        self.validate()

    def validate(self):
        for name in ("seeds", "datasets", "label_fractions", "noise_rates", "affinities", "algorithms"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        for f in self.label_fractions:
            if not 0 < f <= 1:
                raise ConfigError(f"label fraction {f} outside (0, 1]")
        for r in self.noise_rates:
            if not 0 <= r < 1:
                raise ConfigError(f"noise rate {r} outside [0, 1)")
        if self.workers < 1:
            raise ConfigError("workers must be at least 1")
        # records are keyed by these labels, so duplicates would collide
        for what, keys in (("dataset", [d.name for d in self.datasets]),
                           ("affinity", [a.label for a in self.affinities]),
                           ("algorithm", list(self.algorithms)),
                           ("seed", list(self.seeds)),
                           ("label fraction", list(self.label_fractions)),
                           ("noise rate", list(self.noise_rates))):
            if len(set(keys)) != len(keys):
                raise ConfigError(f"duplicate {what} in grid configuration")

    @property
    def cell_count(self) -> int:
        return (len(self.seeds) * len(self.datasets) * len(self.label_fractions)
                * len(self.noise_rates) * len(self.affinities) * len(self.algorithms))


@dataclass
class ExperimentRecord:
    seed: int
    dataset: str
    label_fraction: float
    noise_rate: float
    affinity: str
    algorithm: str
    alpha: float | None
    mu: float | None
    p: float | None
    accuracy: float
    wall_time: float = 0.0
    iterations: int = 0
    isolated: int = 0
    flipped: int = 0
    error: str = ""

    @property
    def failed(self) -> bool:
        return bool(self.error)


def _run_cell(graph, dataset, spec: AlgorithmSpec, state, base: dict) -> ExperimentRecord:
    start = time.perf_counter()
    try:
        scores = spec.run(graph, state)
        pred = alg.predict(scores, state, graph)
        acc = alg.accuracy(pred, dataset.truth, state)
        info = scores.info
        iterations = int(info.get("iterations", info.get("steps", 0)))
        error = ""
    except Exception as exc:  # noqa: BLE001 - failed cells are recorded, not raised
        log.warning("cell %s failed: %s", base, exc)
        acc, iterations, error = math.nan, 0, f"{type(exc).__name__}: {exc}"
    return ExperimentRecord(
        **base, algorithm=spec.name, alpha=spec.alpha, mu=spec.mu, p=spec.p,
        accuracy=acc, wall_time=time.perf_counter() - start, iterations=iterations,
        isolated=int(graph.isolated.sum()), flipped=int(state.flip_record.size) if state else 0,
        error=error,
    )


def run_grid(config: GridConfig, progress=None, graph_cache: dict | None = None) -> list:
    """Run every cell of ``config`` and return records in canonical order.

    Datasets and graphs are built once per (dataset, affinity) and shared by
    all cells.  ``graph_cache`` may be passed in to reuse graphs across
    calls; it maps ``(DatasetSpec, AffinitySpec, seed_root)`` to
    ``(dataset, graph)``.  ``progress`` is called with the number of
    finished cells.
    """
    config.validate()
    cache = {} if graph_cache is None else graph_cache
    records = []
    done = 0
    for ds_spec in config.datasets:
        for aff in config.affinities:
            key = (ds_spec, aff, config.seed_root)
            if key not in cache:
                dataset = ds_spec.load(config.seed_root)
                cache[key] = (dataset, aff.build(dataset))
            dataset, graph = cache[key]
            jobs = []
            for frac, rate, seed in product(config.label_fractions, config.noise_rates, config.seeds):
                base = dict(seed=seed, dataset=ds_spec.name, label_fraction=frac,
                            noise_rate=rate, affinity=aff.label)
                try:
                    state = make_label_state(NoiseSpec(seed, frac, rate), dataset)
                except ValueError as exc:
                    for spec in config.algorithms:
                        records.append(ExperimentRecord(
                            **base, algorithm=spec.name, alpha=spec.alpha, mu=spec.mu,
                            p=spec.p, accuracy=math.nan, isolated=int(graph.isolated.sum()),
                            error=f"{type(exc).__name__}: {exc}"))
                    continue
                jobs.extend((spec, state, base) for spec in config.algorithms)

            def work(job):
                return _run_cell(graph, dataset, *job)

            if config.workers > 1:
                with ThreadPoolExecutor(config.workers) as pool:
                    for rec in pool.map(work, jobs):
                        records.append(rec)
                        done += 1
                        if progress:
                            progress(done)
            else:
                for job in jobs:
                    records.append(work(job))
                    done += 1
                    if progress:
                        progress(done)
    return sort_records(records, config)


def sort_records(records, config: GridConfig | None = None) -> list:
    """Canonical record order, independent of execution order."""
    if config is None:
        return sorted(records, key=record_key)
    ds = {d.name: i for i, d in enumerate(config.datasets)}
    af = {a.label: i for i, a in enumerate(config.affinities)}
    al = {(a.name, a.alpha, a.mu, a.p): i for i, a in enumerate(config.algorithms)}
    lf = {f: i for i, f in enumerate(config.label_fractions)}
    nr = {r: i for i, r in enumerate(config.noise_rates)}
    sd = {s: i for i, s in enumerate(config.seeds)}
    return sorted(records, key=lambda r: (
        ds[r.dataset], af[r.affinity], al[(r.algorithm, r.alpha, r.mu, r.p)],
        lf[r.label_fraction], nr[r.noise_rate], sd[r.seed]))


def record_key(r: ExperimentRecord):
    spec = AlgorithmSpec(r.algorithm, r.alpha, r.mu, r.p)
    return (r.dataset, r.affinity, spec.sort_key(), -r.label_fraction, r.noise_rate, r.seed)


def accuracies(records, **match) -> np.ndarray:
    """Accuracies of the non-failed records matching all ``field=value`` pairs."""
    return np.array([r.accuracy for r in records
                     if not r.failed and all(getattr(r, k) == v for k, v in match.items())])
