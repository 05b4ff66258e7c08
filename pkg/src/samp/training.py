"""Fixture datasets and a small SGD-with-momentum trainer."""
from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import autodiff as ad
from .errors import InputError, TrainingError

log = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class Dataset:
    inputs: np.ndarray  # (n, d)
    labels: np.ndarray  # (n,) int

    def __post_init__(self):
        if len(self.inputs) != len(self.labels):
            raise InputError("inputs and labels differ in length")

    def __len__(self):
        return len(self.labels)

    def check_classes(self, num_classes):
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= num_classes):
            raise InputError(f"labels must lie in [0, {num_classes})")


def make_blob_dataset(n=400, side=8, seed=0, blob_sigma=1.0, noise=0.2) -> Dataset:
    """Two-class images with one Gaussian blob each.

    Class 0 puts the blob in the left third of the image, class 1 in the right
    third; row position, amplitude and background noise are random. Pixels are
    clipped to [0, 1].
    """
    rng = np.random.default_rng(seed)
    yy, xx = np.mgrid[0:side, 0:side].astype(np.float64)
    inputs = np.empty((n, side * side))
    labels = rng.integers(0, 2, size=n)
    for i, lab in enumerate(labels):
        lo, hi = (0.15, 0.35) if lab == 0 else (0.65, 0.85)
        cx = rng.uniform(lo, hi) * (side - 1)
        cy = rng.uniform(0.2, 0.8) * (side - 1)
        amp = rng.uniform(0.6, 1.0)
        img = amp * np.exp(-((xx - cx) ** 2 + (yy - cy) ** 2) / (2 * blob_sigma**2))
        img += rng.uniform(0.0, noise, size=img.shape)
        inputs[i] = np.clip(img, 0.0, 1.0).ravel()
    return Dataset(inputs, labels.astype(np.int64))


def make_separable_dataset(n=100, seed=0, margin=0.5) -> Dataset:
    """Linearly separable 2-D points split by the line x0 + x1 = 0."""
    rng = np.random.default_rng(seed)
    pts = []
    while len(pts) < n:
        p = rng.uniform(-2, 2, size=2)
        if abs(p.sum()) > margin:
            pts.append(p)
    inputs = np.array(pts)
    return Dataset(inputs, (inputs.sum(axis=1) > 0).astype(np.int64))


def accuracy(model, data: Dataset) -> float:
    return float(np.mean(model.predict(data.inputs) == data.labels))


def train_fixture(model, data: Dataset, epochs=200, learning_rate=0.05, seed=0, momentum=0.9, batch_size=32):
    """Minimize softmax cross-entropy with mini-batch SGD plus momentum.

    Returns a new model; ``model`` is left untouched. Identical arguments give
    bit-identical parameters.

    Raises:
        TrainingError: if the loss becomes non-finite (message names the epoch).
    """
    if len(data) == 0:
        raise InputError("cannot train on an empty dataset")
    data.check_classes(model.num_classes)
    rng = np.random.default_rng(seed)
    params = {k: np.array(v) for k, v in model.params.items()}
    velocity = {k: np.zeros_like(v) for k, v in params.items()}
    X = np.asarray(data.inputs, dtype=np.float64).reshape(len(data), model.input_dim)
    y = np.asarray(data.labels)
    n = len(data)

    for epoch in range(1, epochs + 1):
        order = rng.permutation(n)
        total = 0.0
        for start in range(0, n, batch_size):
            idx = order[start:start + batch_size]
            nodes = {k: ad.Node(v) for k, v in params.items()}
            loss = ad.softmax_cross_entropy(model.graph(ad.Node(X[idx]), nodes), y[idx])
            if not np.isfinite(loss.value):
                raise TrainingError(f"loss diverged at epoch {epoch}")
            loss.backward()
            for k, node in nodes.items():
                velocity[k] = momentum * velocity[k] - learning_rate * node.grad
                params[k] = params[k] + velocity[k]
            total += float(loss.value) * len(idx)
        if not all(np.all(np.isfinite(v)) for v in params.values()):
            raise TrainingError(f"parameters diverged at epoch {epoch}")
        if epoch % 50 == 0 or epoch == epochs:
            log.debug("epoch %d loss %.6f", epoch, total / n)
    return model.with_params(params)


def save_dataset(data: Dataset, path):
    """CSV with one sample per row, label in the last column."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        for x, lab in zip(data.inputs, data.labels):
            w.writerow([repr(float(v)) for v in np.ravel(x)] + [int(lab)])


def load_dataset(path) -> Dataset:
    path = Path(path)
    if not path.exists():
        raise InputError(f"dataset not found: {path}")
    rows = []
    with path.open(newline="") as fh:
        for row in csv.reader(fh):
            if row:
                rows.append(row)
    if not rows:
        raise InputError(f"dataset is empty: {path}")
    inputs = np.array([[float(v) for v in r[:-1]] for r in rows])
    labels = np.array([int(float(r[-1])) for r in rows], dtype=np.int64)
    return Dataset(inputs, labels)
