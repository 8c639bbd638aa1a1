"""Datasets: the two synthetic generators, CSV files, splits, scaling.

CSV layout is a header row ``x0,...,x{d-1},y`` followed by one sample
per line, floats written with 17 significant digits so a write/read
round trip reproduces the exact values.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .exceptions import DataFormatError, InvalidConfigError

__all__ = [
    "Dataset",
    "synth_circle",
    "synth_gaussian_classes",
    "load_csv",
    "load_inputs",
    "write_csv",
    "standardize",
    "split",
]

REGRESSION = "regression"
CLASSIFICATION = "classification"

CIRCLE_LEVELS = np.array([2.0, -2.0, 2.0, -2.0])


def fmt(value):
    """Float to text at 17 significant digits (exact round trip)."""
    return format(float(value), ".17g")


@dataclass(frozen=True)
class Dataset:
    """Inputs (N, d), targets (N,), and which task the targets encode."""

    inputs: np.ndarray
    targets: np.ndarray
    task: str

    def __post_init__(self):
        inputs = np.asarray(self.inputs, dtype=float)
        targets = np.asarray(self.targets, dtype=float)
        if inputs.ndim != 2 or targets.ndim != 1:
            raise DataFormatError("inputs must be (N, d) and targets (N,)")
        if inputs.shape[0] != targets.shape[0] or inputs.shape[0] < 1:
            raise DataFormatError("inputs and targets must share N >= 1 rows")
        if not (np.isfinite(inputs).all() and np.isfinite(targets).all()):
            raise DataFormatError("non-finite values in dataset")
        if self.task not in (REGRESSION, CLASSIFICATION):
            raise DataFormatError(f"unknown task {self.task!r}")
        if self.task == CLASSIFICATION and not np.isin(targets, (-1.0, 1.0)).all():
            raise DataFormatError("classification targets must be -1 or +1")
        object.__setattr__(self, "inputs", inputs)
        object.__setattr__(self, "targets", targets)

    def __len__(self):
        return self.inputs.shape[0]

    @property
    def dim(self):
        return self.inputs.shape[1]


def synth_circle(n=100, noise_xy=0.05, noise_y=0.1, seed=0):
    """Noisy points on the unit circle with quadrant-level targets.

    Angles are uniform, inputs are the circle points plus isotropic
    jitter, and the target is +2 in quadrants 1 and 3, -2 in quadrants 2
    and 4, plus observation noise.
    """
    if n < 4:
        raise InvalidConfigError(f"need n >= 4 circle points, got {n}")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0, 2 * np.pi, n)
    inputs = np.column_stack([np.cos(theta), np.sin(theta)]) + rng.normal(
        0, noise_xy, (n, 2)
    )
    quadrant = (theta // (np.pi / 2)).astype(int) % 4
    targets = CIRCLE_LEVELS[quadrant] + rng.normal(0, noise_y, n)
    return Dataset(inputs=inputs, targets=targets, task=REGRESSION)


def circle_grid(n_points=200):
    """Noise-free evaluation grid: even angles on the unit circle."""
    theta = np.linspace(0, 2 * np.pi, n_points, endpoint=False)
    inputs = np.column_stack([np.cos(theta), np.sin(theta)])
    quadrant = (theta // (np.pi / 2)).astype(int) % 4
    return inputs, CIRCLE_LEVELS[quadrant]


_CLASS_MEANS = (np.zeros(2), np.zeros(2))
_CLASS_COVS = (0.0625 * np.eye(2), 2.0 * np.eye(2))


def _one_class_draw(n, rng, means, chols):
    n_pos = n // 2
    n_neg = n - n_pos
    pos = means[0] + rng.standard_normal((n_pos, len(means[0]))) @ chols[0].T
    neg = means[1] + rng.standard_normal((n_neg, len(means[1]))) @ chols[1].T
    inputs = np.vstack([pos, neg])
    targets = np.concatenate([np.ones(n_pos), -np.ones(n_neg)])
    perm = rng.permutation(n)
    return Dataset(
        inputs=inputs[perm], targets=targets[perm], task=CLASSIFICATION
    )


def synth_gaussian_classes(n_train=200, n_test=2000, seed=0, means=None, covs=None):
    """Two Gaussian classes, one tight inside one broad, balanced labels.

    The positive class is the tight inner Gaussian, the negative class
    the broad outer one, so the ideal decision region is an ellipse
    around the origin.  Train and test sets come from one seeded stream:
    same seed, same pair of datasets.
    """
    if n_train < 2 or n_test < 2:
        raise InvalidConfigError("need at least 2 train and 2 test points")
    means = _CLASS_MEANS if means is None else tuple(
        np.asarray(m, dtype=float) for m in means
    )
    covs = _CLASS_COVS if covs is None else tuple(
        np.asarray(c, dtype=float) for c in covs
    )
    if len(means) != 2 or len(covs) != 2:
        raise InvalidConfigError("exactly two class components are supported")
    try:
        chols = tuple(np.linalg.cholesky(c) for c in covs)
    except np.linalg.LinAlgError as exc:
        raise InvalidConfigError("class covariances must be positive definite") from exc
    rng = np.random.default_rng(seed)
    train = _one_class_draw(n_train, rng, means, chols)
    test = _one_class_draw(n_test, rng, means, chols)
    return train, test


def write_csv(dataset, path):
    """Write a dataset in the canonical CSV layout."""
    d = dataset.dim
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"x{i}" for i in range(d)] + ["y"])
        for row, target in zip(dataset.inputs, dataset.targets):
            writer.writerow([fmt(v) for v in row] + [fmt(target)])


def _read_rows(path):
    path = Path(path)
    if not path.exists():
        raise DataFormatError(f"no such data file: {path}")
    with open(path, newline="") as handle:
        rows = list(csv.reader(handle))
    rows = [r for r in rows if r]
    if len(rows) < 2:
        raise DataFormatError(f"{path}: need a header row and at least one sample")
    return rows


def load_csv(path, task):
    """Read a dataset written in the canonical CSV layout."""
    rows = _read_rows(path)
    header = rows[0]
    if header[-1] != "y" or any(
        name != f"x{i}" for i, name in enumerate(header[:-1])
    ):
        raise DataFormatError(f"{path}: malformed header {header}")
    try:
        values = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric row") from exc
    if values.ndim != 2 or values.shape[1] != len(header):
        raise DataFormatError(f"{path}: ragged rows")
    return Dataset(inputs=values[:, :-1], targets=values[:, -1], task=task)


def load_inputs(path):
    """Read only the input columns; a trailing y column is ignored."""
    rows = _read_rows(path)
    header = rows[0]
    n_inputs = len(header) - 1 if header[-1] == "y" else len(header)
    if n_inputs < 1 or any(
        name != f"x{i}" for i, name in enumerate(header[:n_inputs])
    ):
        raise DataFormatError(f"{path}: malformed header {header}")
    try:
        values = np.array([[float(v) for v in row] for row in rows[1:]])
    except ValueError as exc:
        raise DataFormatError(f"{path}: non-numeric row") from exc
    if values.ndim != 2 or values.shape[1] != len(header):
        raise DataFormatError(f"{path}: ragged rows")
    return values[:, :n_inputs]


def standardize(train, test):
    """Scale inputs by train-set column statistics.

    Returns the rescaled pair plus the (mean, sd) stats; constant
    columns keep their values (sd clamped to 1 before dividing).
    """
    mean = train.inputs.mean(axis=0)
    sd = train.inputs.std(axis=0)
    sd = np.where(sd == 0, 1.0, sd)
    scaled = tuple(
        Dataset(
            inputs=(ds.inputs - mean) / sd, targets=ds.targets, task=ds.task
        )
        for ds in (train, test)
    )
    return scaled[0], scaled[1], (mean, sd)


def split(data, fraction, seed):
    """Seeded split into two parts, stratified for classification."""
    if not 0.0 < fraction < 1.0:
        raise InvalidConfigError(f"split fraction must be in (0, 1), got {fraction}")
    rng = np.random.default_rng(seed)
    n = len(data)
    if data.task == CLASSIFICATION:
        first = []
        second = []
        for label in (1.0, -1.0):
            idx = np.flatnonzero(data.targets == label)
            idx = idx[rng.permutation(len(idx))]
            cut = int(round(fraction * len(idx)))
            first.extend(idx[:cut])
            second.extend(idx[cut:])
        first = np.sort(np.array(first, dtype=int))
        second = np.sort(np.array(second, dtype=int))
    else:
        order = rng.permutation(n)
        cut = int(round(fraction * n))
        first = np.sort(order[:cut])
        second = np.sort(order[cut:])
    if len(first) == 0 or len(second) == 0:
        raise InvalidConfigError("split left one side empty; adjust fraction")

    def take(idx):
        return Dataset(
            inputs=data.inputs[idx], targets=data.targets[idx], task=data.task
        )

    return take(first), take(second)
