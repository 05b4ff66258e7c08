"""Deletion/Insertion curves, baseline construction and the Sensitivity-N
style completeness check."""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError, NumericError
from .models import as_tensor
from .paths import SampConfig, attribute

BASELINE_KINDS = ("black", "white", "uniform_random", "gaussian_random", "gaussian_blur")


@dataclass(frozen=True)
class BaselineSpec:
    kind: str = "black"
    blur_kernel: int | None = None
    blur_sigma: float | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in BASELINE_KINDS:
            raise InputError(f"baseline kind must be one of {BASELINE_KINDS}")
        has_blur = self.blur_kernel is not None or self.blur_sigma is not None
        if (self.kind == "gaussian_blur") != has_blur:
            raise InputError("blur parameters are required for, and only for, gaussian_blur")
        if self.kind == "gaussian_blur":
            if self.blur_kernel < 1 or self.blur_kernel % 2 == 0:
                raise InputError("blur kernel size must be a positive odd integer")
            if not self.blur_sigma > 0:
                raise InputError("blur sigma must be positive")

    @classmethod
    def blur(cls, kernel=11, sigma=5.0):
        return cls("gaussian_blur", kernel, sigma)


@dataclass(frozen=True, eq=False)
class MetricCurve:
    """Scores along a deletion or insertion run.

    ``pixels[k]`` features have been modified at point ``k``; ``y_hat`` is the
    raw score divided by the score of the unmodified input.
    """

    pixels: np.ndarray
    y_raw: np.ndarray
    y_hat: np.ndarray
    mode: str

    @property
    def auc(self) -> float:
        return float(np.mean(self.y_hat))

    @property
    def points(self):
        return list(zip(self.pixels.tolist(), self.y_hat.tolist()))


def gaussian_kernel(size, sigma) -> np.ndarray:
    """1-D Gaussian taps with ``sigma`` as the standard deviation, summing to 1."""
    if size < 1 or size % 2 == 0:
        raise InputError("kernel size must be a positive odd integer")
    r = size // 2
    t = np.arange(-r, r + 1, dtype=np.float64)
    k = np.exp(-(t**2) / (2.0 * sigma**2))
    return k / k.sum()


def gaussian_blur(x, kernel_size=11, sigma=5.0) -> np.ndarray:
    """Separable Gaussian blur over the first two axes.

    Borders are mirrored about the pixel edge (``d c b a | a b c d``), which
    with a symmetric kernel keeps the image mean unchanged.
    """
    x = as_tensor(x)
    if x.ndim not in (2, 3):
        raise InputError("blur expects an (H, W) or (H, W, C) image")
    k = gaussian_kernel(kernel_size, sigma)
    r = kernel_size // 2
    out = x
    for axis in (0, 1):
        pad = [(0, 0)] * x.ndim
        pad[axis] = (r, r)
        padded = np.pad(out, pad, mode="symmetric")
        n = out.shape[axis]
        acc = np.zeros_like(out)
        for j, w in enumerate(k):
            acc += w * np.take(padded, np.arange(j, j + n), axis=axis)
        out = acc
    return out


def make_baseline(x, spec: BaselineSpec) -> np.ndarray:
    x = as_tensor(x)
    rng = np.random.default_rng(spec.seed)
    if spec.kind == "black":
        return np.zeros_like(x)
    if spec.kind == "white":
        return np.ones_like(x)
    if spec.kind == "uniform_random":
        return rng.uniform(0.0, 1.0, size=x.shape)
    if spec.kind == "gaussian_random":
        return np.clip(rng.normal(0.5, 0.25, size=x.shape), 0.0, 1.0)
    return gaussian_blur(x, spec.blur_kernel, spec.blur_sigma)


def _score(model, x, cls, softmax):
    if not softmax:
        return model.forward(x, cls)
    z = model.logits(x)
    z = z - z.max()
    return float(np.exp(z[cls]) / np.exp(z).sum())


def rank_features(values) -> np.ndarray:
    """Flat indices by descending attribution, ties by ascending index."""
    return np.argsort(-np.ravel(values), kind="stable")


def deletion_insertion(model, cls, x, attribution, mode, step=1, baseline=None, softmax=False) -> MetricCurve:
    """Delete (or insert) the top-ranked features ``step`` at a time.

    Deletion starts from ``x`` and overwrites features with the baseline;
    insertion starts from the baseline and restores features from ``x``.
    Scores are pre-softmax unless ``softmax`` is set.

    Raises:
        NumericError: the score of ``x`` itself is (numerically) zero.
    """
    if mode not in ("deletion", "insertion"):
        raise InputError("mode must be 'deletion' or 'insertion'")
    if step < 1:
        raise InputError("metric step must be at least 1")
    values = getattr(attribution, "values", attribution)
    x = as_tensor(x).reshape(model.input_shape)
    if np.size(values) != x.size:
        raise InputError("attribution and input differ in size")
    if baseline is None:
        baseline = BaselineSpec("black") if mode == "deletion" else BaselineSpec.blur()
    base = make_baseline(x, baseline).ravel()
    flat = x.ravel()
    y_target = _score(model, flat, cls, softmax)
    if abs(y_target) < 1e-12:
        raise NumericError("score of the unmodified input is zero; cannot normalize")

    order = rank_features(values)
    d = flat.size
    n_steps = math.ceil(d / step)
    cur = flat.copy() if mode == "deletion" else base.copy()
    source = base if mode == "deletion" else flat
    pixels = [0]
    scores = [y_target if mode == "deletion" else _score(model, cur, cls, softmax)]
    for k in range(1, n_steps + 1):
        idx = order[(k - 1) * step:k * step]
        cur[idx] = source[idx]
        pixels.append(min(k * step, d))
        scores.append(_score(model, cur, cls, softmax))
    if mode == "insertion":
        scores[-1] = y_target  # cur == x exactly here
    y_raw = np.array(scores)
    return MetricCurve(np.array(pixels), y_raw, y_raw / y_target, mode)


def pearson(xs, ys) -> float:
    """Sample Pearson correlation coefficient."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    if xs.shape != ys.shape or xs.ndim != 1 or xs.size < 2:
        raise InputError("pearson needs two equal-length sequences of at least 2 values")
    dx = xs - xs.mean()
    dy = ys - ys.mean()
    sxx = float(dx @ dx)
    syy = float(dy @ dy)
    if sxx == 0 or syy == 0:
        raise NumericError("correlation undefined for a constant sequence")
    r = float(dx @ dy) / math.sqrt(sxx * syy)
    return max(-1.0, min(1.0, r))


def _classes(cls, n):
    return list(cls) if np.ndim(cls) else [int(cls)] * n


def _default_baselines(inputs, baselines):
    if baselines is None:
        return [np.zeros_like(np.asarray(x, dtype=np.float64)) for x in inputs]
    return list(baselines)


def _targets(bases, target_baselines):
    return [None] * len(bases) if target_baselines is None else list(target_baselines)


def completeness_sweep(model, cls, inputs, eta_ratios, cfg: SampConfig, baselines=None, target_baselines=None):
    """Relative completeness gaps per ``eta_ratio``.

    ``target_baselines`` optionally start the to-target runs. Returns
    ``[(ratio, gaps), ...]`` where ``gaps`` holds one value per input.
    """
    inputs = list(inputs)
    classes = _classes(cls, len(inputs))
    bases = _default_baselines(inputs, baselines)
    targets = _targets(bases, target_baselines)
    rows = []
    for ratio in eta_ratios:
        c = replace(cfg, eta_ratio=ratio)
        gaps = [attribute(model, k, b, x, c, t).relative_gap
                for x, k, b, t in zip(inputs, classes, bases, targets)]
        rows.append((ratio, np.array(gaps)))
    return rows


def sensitivity_sweep(model, cls, inputs, beta_list, cfg: SampConfig, baselines=None, target_baselines=None):
    """Pearson correlation of total attribution against output change per beta.

    For each beta the step cap is ``||xS - xE||_1 / beta``.
    """
    inputs = list(inputs)
    if len(inputs) < 10:
        raise InputError("sensitivity sweep needs at least 10 inputs")
    betas = list(beta_list)
    if any(b <= 0 for b in betas) or betas != sorted(betas):
        raise InputError("beta_list must be positive and ascending")
    classes = _classes(cls, len(inputs))
    bases = _default_baselines(inputs, baselines)
    targets = _targets(bases, target_baselines)
    out = []
    for beta in betas:
        c = replace(cfg, eta_ratio=min(1.0, 1.0 / beta))
        sums, dys = [], []
        for x, k, b, t in zip(inputs, classes, bases, targets):
            att = attribute(model, k, b, x, c, t)
            sums.append(float(np.sum(att.values)))
            dys.append(att.expected_total)
        out.append((beta, pearson(sums, dys)))
    return out
