"""Seeded selection of labelled instances and class-flip label noise.

Sampling and corruption draw from separate substreams of one root seed,
so varying the noise rate never changes which instances are labelled.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .algorithms import LabelState
from .datasets import LabeledDataset

__all__ = [
    "NoiseError",
    "NoiseSpec",
    "round_half_up",
    "sample_labeled",
    "inject_noise",
    "make_label_state",
]

SAMPLING_STREAM = 0
CORRUPTION_STREAM = 1
MAX_SAMPLING_ATTEMPTS = 1000


class NoiseError(ValueError):
    pass


def round_half_up(x: float) -> int:
    # the epsilon absorbs binary representation error, e.g. 0.35 * 30
    return int(math.floor(x + 0.5 + 1e-9))


@dataclass(frozen=True)
class NoiseSpec:
    """Seed, labelled fraction and per-class flip rate of one configuration.

    ``noise_seed`` decouples the corruption draw from the sampling draw;
    by default both substreams derive from ``seed``.
    """

    seed: int
    label_fraction: float
    noise_rate: float = 0.0
    noise_seed: int | None = None
    multiclass: bool = False

    def __post_init__(self):
        if not 0.0 < self.label_fraction <= 1.0:
            raise NoiseError(f"label_fraction must lie in (0, 1], got {self.label_fraction}")
        if not 0.0 <= self.noise_rate < 1.0:
            raise NoiseError(f"noise_rate must lie in [0, 1), got {self.noise_rate}")

    def label_count(self, n: int) -> int:
        return round_half_up(self.label_fraction * n)

    def rng(self, stream: int, attempt: int = 0) -> np.random.Generator:
        if stream == CORRUPTION_STREAM:
            root = self.seed if self.noise_seed is None else self.noise_seed
            return np.random.default_rng([root, stream])
        return np.random.default_rng([self.seed, stream, attempt])


def sample_labeled(spec: NoiseSpec, dataset: LabeledDataset) -> LabelState:
    """Draw ``round(label_fraction * n)`` labelled instances uniformly.

    A draw that misses a class is discarded and redrawn from a fresh
    substream.
    """
    n, c = dataset.n, dataset.class_count
    count = spec.label_count(n)
    if count < c:
        raise NoiseError(
            f"label fraction {spec.label_fraction} gives {count} labels for {c} classes")
    for attempt in range(MAX_SAMPLING_ATTEMPTS):
        rng = spec.rng(SAMPLING_STREAM, attempt)
        idx = np.sort(rng.choice(n, size=count, replace=False))
        if np.unique(dataset.truth[idx]).size == c:
            return LabelState.from_labels(n, idx, dataset.truth[idx], c)
    raise NoiseError(f"no draw covered all {c} classes after {MAX_SAMPLING_ATTEMPTS} attempts")


def inject_noise(spec: NoiseSpec, state: LabelState, truth=None) -> LabelState:
    """Flip ``round(noise_rate * l_class)`` labels of every class.

    Binary problems flip to the other class.  With ``spec.multiclass`` a
    flipped label moves to a uniformly drawn different class.  Classes are
    taken from the observed labels (``truth`` is accepted for API symmetry
    and checked for consistency when given).
    """
    c = state.class_count
    if c > 2 and not spec.multiclass:
        raise NoiseError("the class-flip rule is binary; set multiclass=True for c > 2")
    lab = state.labeled
    observed = state.observed.copy()
    if truth is not None:
        truth = np.asarray(truth)
        if truth.shape != observed.shape:
            raise NoiseError("truth must have one entry per instance")
    if spec.noise_rate == 0:
        return LabelState(observed, c, state.flip_record)

    rng = spec.rng(CORRUPTION_STREAM)
    flipped = []
    for j in range(c):
        members = lab[observed[lab] == j]
        k = round_half_up(spec.noise_rate * members.size)
        chosen = np.sort(rng.choice(members, size=k, replace=False)) if k else members[:0]
        flipped.append(chosen)
    flipped = np.concatenate(flipped)
    # decide every flip before applying any, so class membership is the clean one
    if c == 2:
        new = 1 - observed[flipped]
    else:
        shift = rng.integers(1, c, size=flipped.size)
        new = (observed[flipped] + shift) % c
    observed[flipped] = new
    record = np.setxor1d(state.flip_record, flipped)
    return LabelState(observed, c, record)


def make_label_state(spec: NoiseSpec, dataset: LabeledDataset) -> LabelState:
    """Sampling followed by corruption, the per-cell label pipeline."""
    return inject_noise(spec, sample_labeled(spec, dataset), dataset.truth)
