"""Method dispatch and Deletion/Insertion evaluation over many inputs."""
from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .errors import InputError
from .metrics import BaselineSpec, deletion_insertion, make_baseline
from .paths import SampConfig, attribute, integrated_gradients

METHODS = ("ig", "samp", "samp++")


@dataclass(frozen=True)
class EvalSettings:
    """Hyperparameters shared by attribution and metric computation.

    ``attr_baseline`` is the start point of IG and the end point of the
    to-baseline run; ``target_baseline`` starts the to-target run.
    """

    step_pixels: int = 1
    eta_ratio: float | None = 0.1
    momentum: float = 0.5
    direction: str = "both"
    halve_both: bool = False
    ig_steps: int = 64
    metric_step: int = 1
    blur_kernel: int = 11
    blur_sigma: float = 5.0
    attr_baseline: str = "black"
    target_baseline: str = "gaussian_blur"
    deletion_baseline: str = "black"
    insertion_baseline: str = "gaussian_blur"
    seed: int = 0

    def baseline_spec(self, kind) -> BaselineSpec:
        if kind == "gaussian_blur":
            return BaselineSpec.blur(self.blur_kernel, self.blur_sigma)
        return BaselineSpec(kind, seed=self.seed)

    def samp_config(self, method) -> SampConfig:
        if method == "samp":
            return SampConfig(self.step_pixels, None, 0.0, self.direction, halve_both=self.halve_both)
        return SampConfig(self.step_pixels, self.eta_ratio, self.momentum, self.direction,
                          halve_both=self.halve_both)


def _image(model, x):
    x = np.asarray(x, dtype=np.float64)
    return x.reshape(model.input_shape) if len(model.input_shape) >= 2 else x.reshape(-1)


def explain(method, model, cls, x, settings: EvalSettings):
    """Attribution of ``x`` for class ``cls`` under ``method``."""
    if method not in METHODS:
        raise InputError(f"unknown method {method!r}; choose from {METHODS}")
    img = _image(model, x)
    x0 = make_baseline(img, settings.baseline_spec(settings.attr_baseline))
    if method == "ig":
        return integrated_gradients(model, cls, x0, img, settings.ig_steps)
    x0t = make_baseline(img, settings.baseline_spec(settings.target_baseline))
    return attribute(model, cls, x0, img, settings.samp_config(method), x0_target=x0t)


def evaluate_one(method, model, cls, x, settings: EvalSettings):
    """Deletion and insertion curves for one input."""
    att = explain(method, model, cls, x, settings)
    img = _image(model, x)
    dele = deletion_insertion(model, cls, img, att, "deletion", settings.metric_step,
                              settings.baseline_spec(settings.deletion_baseline))
    ins = deletion_insertion(model, cls, img, att, "insertion", settings.metric_step,
                             settings.baseline_spec(settings.insertion_baseline))
    return att, dele, ins


def _job(args):
    method, model, cls, x, settings = args
    _, dele, ins = evaluate_one(method, model, cls, x, settings)
    return dele, ins


def evaluate_methods(model, inputs, classes, methods, settings: EvalSettings, workers=1):
    """Curves per method and input: ``{method: [(deletion, insertion), ...]}``."""
    jobs = [(m, model, int(c), x, settings) for m in methods for x, c in zip(inputs, classes)]
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_job, jobs))
    else:
        results = [_job(j) for j in jobs]
    n = len(inputs)
    return {m: results[i * n:(i + 1) * n] for i, m in enumerate(methods)}


def summarize(curves) -> dict:
    """Mean, standard deviation and median of the AUCs per method."""
    out = {}
    for method, pairs in curves.items():
        dels = np.array([d.auc for d, _ in pairs])
        ins = np.array([i.auc for _, i in pairs])
        out[method] = {
            "n": int(len(pairs)),
            "deletion": {"mean": float(dels.mean()), "std": float(dels.std()), "median": float(np.median(dels))},
            "insertion": {"mean": float(ins.mean()), "std": float(ins.std()), "median": float(np.median(ins))},
        }
    return out


def select_inputs(model, data, n):
    """First ``n`` samples the model classifies correctly with a positive score.

    A positive score keeps the ``y / y^T`` normalization meaningful.
    """
    chosen = []
    for i, (x, lab) in enumerate(zip(data.inputs, data.labels)):
        logits = model.logits(x)
        if int(np.argmax(logits)) == int(lab) and logits[int(lab)] > 0:
            chosen.append(i)
        if len(chosen) == n:
            break
    return chosen


def with_direction(settings: EvalSettings, direction) -> EvalSettings:
    return replace(settings, direction=direction)
