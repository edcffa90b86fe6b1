"""Synthetic benchmark datasets and CSV ingestion.

Three seeded generators mirror the benchmark families used in the label
noise study: two Gaussian clusters (``g241c``), four Gaussians with a
misleading cluster structure (``g241n``) and a smooth 5-parameter manifold
standing in for ``Digit1``.  Every generator is a pure function of
``(seed, n, d)``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

__all__ = [
    "DatasetError",
    "CSVParseError",
    "LabeledDataset",
    "gen_g241c",
    "gen_g241n",
    "gen_digit1_like",
    "digit1_latent_class",
    "digit1_trig_features",
    "load_csv",
    "save_csv",
    "make_dataset",
    "GENERATORS",
]

G241C_SEPARATION = 7.0
G241N_INTRA_DISTANCE = 6.0
G241N_INTER_GAP = 1.0
DIGIT1_LATENT_DIM = 5
DIGIT1_NOISE = 0.05
# the class coordinate varies twice as strongly as the four nuisance ones
DIGIT1_AMPLITUDE = (2.0, 1.0, 1.0, 1.0, 1.0)


class DatasetError(ValueError):
    """Raised when a dataset violates its invariants or generator preconditions."""


class CSVParseError(DatasetError):
    def __init__(self, message, row=None, column=None):
        self.row = row
        self.column = column
        where = ""
        if row is not None:
            where = f" (row {row}" + (f", column {column})" if column is not None else ")")
        super().__init__(message + where)


@dataclass(frozen=True, eq=False)
class LabeledDataset:
    """Feature matrix with ground-truth classes.

    Attributes
    ----------
    features : ndarray, shape (n, d)
    truth : ndarray of int, shape (n,)
        Class index of every row, in ``0 .. class_count - 1``.
    class_count : int
    name : str
    info : dict
        Generator parameters (means, latent coordinates, ...) kept for
        inspection and testing.
    """

    features: np.ndarray
    truth: np.ndarray
    class_count: int
    name: str = "dataset"
    info: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        X = np.array(self.features, dtype=float, copy=True)
        y = np.array(self.truth, copy=True)
        if X.ndim != 2:
            raise DatasetError("features must be a 2-d matrix")
        n, d = X.shape
        if n < 2 or d < 1:
            raise DatasetError(f"need n >= 2 and d >= 1, got n={n}, d={d}")
        if not np.all(np.isfinite(X)):
            raise DatasetError("features contain non-finite values")
        if y.shape != (n,):
            raise DatasetError("truth must have one entry per row")
        if not np.issubdtype(y.dtype, np.integer):
            if not np.all(np.equal(np.mod(y, 1), 0)):
                raise DatasetError("truth must hold integer class indices")
        y = y.astype(np.int64)
        c = int(self.class_count)
        if c < 2:
            raise DatasetError("class_count must be at least 2")
        if y.min() < 0 or y.max() >= c:
            raise DatasetError("truth values must lie in 0..class_count-1")
        if np.bincount(y, minlength=c).min() == 0:
            raise DatasetError("every class needs at least one instance")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "truth", y)
        object.__setattr__(self, "class_count", c)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def d(self) -> int:
        return self.features.shape[1]


def _random_orthonormal(rng, d, k):
    q, r = np.linalg.qr(rng.standard_normal((d, k)))
    # fix the QR sign ambiguity so the directions depend only on the draw
    return q * np.sign(np.diag(r))


def gen_g241c(seed: int, n: int = 1500, d: int = 241) -> LabeledDataset:
    """Two isotropic unit-variance Gaussians with antipodal means.

    The means sit at ``+-3.5 u`` for a seeded random unit vector ``u``
    (separation :data:`G241C_SEPARATION`).  In 241 dimensions nearest
    neighbour lists are dominated by hubs, and only from about this
    separation on does the mutual 15-NN graph expose the two clusters
    through its smoothest Laplacian eigenvector.
    """
    if d < 1:
        raise DatasetError("d must be at least 1")
    if n < 2 or n % 2:
        raise DatasetError(f"g241c needs an even n >= 2, got {n}")
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(d)
    u /= np.linalg.norm(u)
    means = np.stack([0.5 * G241C_SEPARATION * u, -0.5 * G241C_SEPARATION * u])
    truth = np.repeat([0, 1], n // 2)
    X = means[truth] + rng.standard_normal((n, d))
    order = rng.permutation(n)
    return LabeledDataset(
        X[order], truth[order], 2, name="g241c",
        info={"means": means, "seed": seed},
    )


def gen_g241n(seed: int, n: int = 1500, d: int = 241) -> LabeledDataset:
    """Four unit-variance Gaussians A1, A2 (class 0) and B1, B2 (class 1).

    A1/B1 and A2/B2 are only 1.0 apart while the two pairs are 6.0 apart,
    so the obvious cluster structure does not follow the classes.
    ``info["component"]`` records the generating Gaussian (0=A1, 1=A2,
    2=B1, 3=B2).
    """
    if d < 2:
        raise DatasetError("g241n needs d >= 2")
    if n < 4 or n % 4:
        raise DatasetError(f"g241n needs n divisible by 4, got {n}")
    rng = np.random.default_rng(seed)
    basis = _random_orthonormal(rng, d, 2)
    far, near = basis[:, 0], basis[:, 1]
    half_far = 0.5 * G241N_INTRA_DISTANCE
    half_gap = 0.5 * G241N_INTER_GAP
    means = np.stack([
        -half_far * far + half_gap * near,  # A1
        half_far * far + half_gap * near,  # A2
        -half_far * far - half_gap * near,  # B1
        half_far * far - half_gap * near,  # B2
    ])
    component = np.repeat(np.arange(4), n // 4)
    truth = component // 2
    X = means[component] + rng.standard_normal((n, d))
    order = rng.permutation(n)
    return LabeledDataset(
        X[order], truth[order], 2, name="g241n",
        info={"means": means, "component": component[order], "seed": seed},
    )


def digit1_trig_features(latent: np.ndarray) -> np.ndarray:
    """Low-order trigonometric features of latent points in ``[0, 1]^5``.

    Frequencies 1 and 2 of sin and cos per latent coordinate, 20 columns.
    """
    latent = np.atleast_2d(latent)
    cols = []
    for freq in (1, 2):
        arg = np.pi * freq * latent
        cols.append(np.sin(arg))
        cols.append(np.cos(arg))
    return np.hstack(cols)


def digit1_latent_class(latent) -> np.ndarray:
    """Class of latent points: 1 where the first coordinate exceeds 0.5."""
    latent = np.atleast_2d(np.asarray(latent, dtype=float))
    return (latent[:, 0] > 0.5).astype(np.int64)


def gen_digit1_like(seed: int, n: int = 1500, d: int = 241) -> LabeledDataset:
    """Smooth 5-parameter manifold surrogate for Digit1.

    Latent points are uniform on ``[0, 1]^5``, lifted through
    :func:`digit1_trig_features` (features of the first, class-bearing
    coordinate scaled by 2) and a seeded Gaussian linear map into
    ``d`` dimensions, then perturbed by N(0, 0.05^2) noise.  The class is
    the indicator of the first latent coordinate exceeding 0.5; the two
    classes are drawn in equal numbers (the odd instance goes to class 0).
    """
    if n < 4:
        raise DatasetError("digit1 surrogate needs n >= 4")
    if d < 6:
        raise DatasetError("digit1 surrogate needs d >= 6")
    rng = np.random.default_rng(seed)
    n1 = n // 2
    n0 = n - n1
    latent = rng.uniform(0.0, 1.0, size=(n, DIGIT1_LATENT_DIM))
    latent[:n0, 0] = 0.5 * rng.uniform(0.0, 1.0, size=n0)          # [0, 0.5)
    latent[n0:, 0] = 1.0 - 0.5 * rng.uniform(0.0, 1.0, size=n1)    # (0.5, 1]
    phi = digit1_trig_features(latent) * np.tile(DIGIT1_AMPLITUDE, 4)
    embed = rng.standard_normal((phi.shape[1], d)) / math.sqrt(phi.shape[1])
    X = phi @ embed + DIGIT1_NOISE * rng.standard_normal((n, d))
    truth = digit1_latent_class(latent)
    order = rng.permutation(n)
    return LabeledDataset(
        X[order], truth[order], 2, name="digit1",
        info={"latent": latent[order], "embedding": embed, "seed": seed},
    )


GENERATORS = {
    "g241c": gen_g241c,
    "g241n": gen_g241n,
    "digit1": gen_digit1_like,
}


def make_dataset(name: str, seed: int, n: int = 1500, d: int = 241) -> LabeledDataset:
    """Dispatch to a generator by name, or load ``csv:<path>``."""
    if name.startswith("csv:"):
        return load_csv(name[4:])
    try:
        gen = GENERATORS[name]
    except KeyError:
        raise DatasetError(
            f"unknown dataset {name!r}; expected one of {sorted(GENERATORS)} or csv:<path>"
        ) from None
    return gen(seed, n=n, d=d)


def _is_number(text):
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path) -> LabeledDataset:
    """Read a comma-separated file whose last column is an integer class.

    A first row that is not entirely numeric is treated as a header.
    Classes are re-indexed densely by ascending original value.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if rows and not all(_is_number(c) for c in rows[0]):
        rows = rows[1:]
        first_line = 2
    else:
        first_line = 1
    if len(rows) < 2:
        raise DatasetError(f"{path}: need at least two data rows")
    width = len(rows[0])
    if width < 2:
        raise DatasetError(f"{path}: need at least one feature column and a class column")

    X = np.empty((len(rows), width - 1))
    raw = np.empty(len(rows), dtype=np.int64)
    for r, row in enumerate(rows):
        lineno = r + first_line
        if len(row) != width:
            raise CSVParseError(f"{path}: expected {width} cells, found {len(row)}", row=lineno)
        for c, cell in enumerate(row[:-1]):
            try:
                value = float(cell)
            except ValueError:
                raise CSVParseError(f"{path}: non-numeric cell {cell!r}", row=lineno, column=c + 1) from None
            if not math.isfinite(value):
                raise CSVParseError(f"{path}: non-finite cell {cell!r}", row=lineno, column=c + 1)
            X[r, c] = value
        label = row[-1].strip()
        try:
            value = float(label)
        except ValueError:
            raise CSVParseError(f"{path}: class cell {label!r} is not an integer", row=lineno, column=width) from None
        if not math.isfinite(value) or value != int(value):
            raise CSVParseError(f"{path}: class cell {label!r} is not an integer", row=lineno, column=width)
        raw[r] = int(value)

    classes, truth = np.unique(raw, return_inverse=True)
    if classes.size < 2:
        raise DatasetError(f"{path}: file holds a single class ({classes[0]})")
    return LabeledDataset(
        X, truth.reshape(-1), classes.size, name=path.stem,
        info={"original_classes": classes},
    )


def save_csv(dataset: LabeledDataset, path, header: bool = True) -> Path:
    """Write features and class to CSV; floats use shortest round-trip repr."""
    path = Path(path)
    with path.open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh, lineterminator="\n")
        if header:
            w.writerow([f"x{j}" for j in range(dataset.d)] + ["class"])
        for x, y in zip(dataset.features, dataset.truth):
            w.writerow([repr(float(v)) for v in x] + [int(y)])
    return path
