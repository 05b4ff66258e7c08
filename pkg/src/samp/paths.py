"""Path attribution: Riemann-sum integrator, straight-line (IG) paths and the
greedy salient-manipulation-path search with step capping and momentum.

Every attribution is a left Riemann sum: step ``k`` is weighted by the
gradient at the point *before* the step is taken.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import EmptySelectionError, InputError, NonTerminationError
from .models import as_tensor

DIRECTIONS = ("to_baseline", "to_target", "both")


@dataclass(frozen=True, eq=False)
class PathSegments:
    start: np.ndarray
    end: np.ndarray
    steps: tuple

    def __post_init__(self):
        for s in self.steps:
            if np.shape(s) != np.shape(self.start):
                raise InputError("every step must have the shape of the start point")

    def __len__(self):
        return len(self.steps)

    def points(self):
        """Yield x^0 = start, x^1, ..., x^n (x^n is ``end`` up to rounding)."""
        x = np.array(self.start, dtype=np.float64)
        yield x.copy()
        for s in self.steps:
            x = x + s
            yield x.copy()

    def telescoping_error(self) -> float:
        total = np.array(self.start, dtype=np.float64)
        for s in self.steps:
            total = total + s
        return float(np.max(np.abs(total - self.end), initial=0.0))


@dataclass(frozen=True, eq=False)
class Attribution:
    """Per-feature attribution with its completeness bookkeeping.

    ``expected_total`` is what the values should sum to. It defaults to
    ``delta_y``; a two-direction sum expects the sum of both output changes.
    """

    values: np.ndarray
    delta_y: float
    expected_total: float | None = None
    components: dict = field(default_factory=dict, repr=False)

    def __post_init__(self):
        if self.expected_total is None:
            object.__setattr__(self, "expected_total", float(self.delta_y))

    @property
    def variance(self) -> float:
        return variance_objective(self.values)

    @property
    def completeness_gap(self) -> float:
        return abs(float(np.sum(self.values)) - self.expected_total)

    @property
    def relative_gap(self) -> float:
        return self.completeness_gap / max(abs(self.expected_total), 1e-12)


@dataclass(frozen=True)
class SampConfig:
    """Search settings.

    ``eta_ratio`` is the per-step L1 cap as a fraction of ``||xS - xE||_1``;
    ``None`` means unbounded. ``termination_epsilon`` is relative to the same
    norm. ``halve_both`` scales a two-direction sum by 1/2.
    """

    step_pixels: int = 1
    eta_ratio: float | None = 0.1
    momentum: float = 0.5
    direction: str = "both"
    termination_epsilon: float = 1e-8
    halve_both: bool = False

    def __post_init__(self):
        if int(self.step_pixels) != self.step_pixels or self.step_pixels < 1:
            raise InputError("step_pixels must be a positive integer")
        if self.eta_ratio is not None and not 0 < self.eta_ratio <= 1:
            raise InputError("eta_ratio must lie in (0, 1] or be None")
        if not 0 <= self.momentum < 1:
            raise InputError("momentum must lie in [0, 1)")
        if self.direction not in DIRECTIONS:
            raise InputError(f"direction must be one of {DIRECTIONS}")
        if self.termination_epsilon < 0:
            raise InputError("termination_epsilon must be non-negative")


def variance_objective(a) -> float:
    """Population variance of the attribution entries."""
    a = np.ravel(a.values if isinstance(a, Attribution) else a).astype(np.float64)
    if a.size == 0:
        return 0.0
    return float(np.mean((a - a.mean()) ** 2))


def straight_line_path(x0, xT, n) -> PathSegments:
    x0 = as_tensor(x0, "x0")
    xT = as_tensor(xT, "xT")
    if x0.shape != xT.shape:
        raise InputError(f"shape mismatch {x0.shape} vs {xT.shape}")
    if n < 1:
        raise InputError("n must be at least 1")
    step = (xT - x0) / n
    return PathSegments(x0, xT, tuple(step.copy() for _ in range(n)))


def momentum_update(g_prev, grad, lam) -> np.ndarray:
    if not 0 <= lam < 1:
        raise InputError("momentum must lie in [0, 1)")
    if np.shape(g_prev) != np.shape(grad):
        raise InputError("momentum shapes differ")
    return lam * np.asarray(g_prev) + (1.0 - lam) * np.asarray(grad)


def integrate_path(model, cls, path: PathSegments, momentum=None) -> Attribution:
    """Left Riemann sum of gradient times step along ``path``.

    With ``momentum`` set, the gradient is replaced by its exponential moving
    average seeded with the gradient at the start point.
    """
    a = np.zeros_like(np.asarray(path.start, dtype=np.float64))
    g = None
    for x, step in zip(path.points(), path.steps):
        grad = model.gradient(x, cls)
        if momentum is None or g is None:
            g = grad
        else:
            g = momentum_update(g, grad, momentum)
        a += g * step
    dy = model.forward(path.end, cls) - model.forward(path.start, cls)
    return Attribution(a, float(dy))


def samp_select(grad, x_k, x_E, s):
    """Pick the ``s`` unfinished coordinates with the largest projection.

    ``alpha_j = grad_j * (x_E_j - x_k_j)``; finished coordinates get -inf and
    ties go to the lower index. Returns the chosen flat indices and a step
    that moves exactly those coordinates onto ``x_E``.
    """
    if s < 1:
        raise InputError("s must be at least 1")
    grad = np.asarray(grad, dtype=np.float64)
    x_k = np.asarray(x_k, dtype=np.float64)
    x_E = np.asarray(x_E, dtype=np.float64)
    residual = (x_E - x_k).ravel()
    open_ = residual != 0
    n_open = int(open_.sum())
    if n_open == 0:
        raise EmptySelectionError("all coordinates already at the end point")
    alpha = np.where(open_, grad.ravel() * residual, -np.inf)
    chosen = np.argsort(-alpha, kind="stable")[: min(int(s), n_open)]
    step = np.zeros_like(residual)
    step[chosen] = residual[chosen]
    return np.sort(chosen), step.reshape(x_k.shape)


def apply_infinitesimal_constraint(step, eta) -> np.ndarray:
    """Rescale ``step`` onto the L1 ball of radius ``eta`` when it is outside."""
    if not eta > 0:
        raise InputError("eta must be positive")
    step = np.asarray(step, dtype=np.float64)
    norm = float(np.abs(step).sum())
    if norm > eta:
        return step * (eta / norm)
    return step


def samp_attribute(model, cls, xS, xE, cfg: SampConfig):
    """Greedy manipulation path from ``xS`` to ``xE``.

    Returns ``(Attribution, PathSegments)``; the attribution sums (up to the
    Riemann error) to ``f(xE) - f(xS)``.

    Raises:
        NonTerminationError: iteration count passed ``ceil(L1/eta) + d + 1``.
    """
    xS = as_tensor(xS, "xS")
    xE = as_tensor(xE, "xE")
    if xS.shape != xE.shape:
        raise InputError(f"shape mismatch {xS.shape} vs {xE.shape}")
    d = xS.size
    total = float(np.abs(xE - xS).sum())
    eta = math.inf if cfg.eta_ratio is None else cfg.eta_ratio * total
    eps = cfg.termination_epsilon * total
    limit = (math.ceil(total / eta) if math.isfinite(eta) and eta > 0 else 0) + d + 1
    lam = cfg.momentum

    x = xS.copy()
    a = np.zeros_like(x)
    g = model.gradient(xS, cls)
    steps = []
    while np.any(x != xE):
        if len(steps) >= limit:
            raise NonTerminationError(f"no convergence after {limit} steps")
        g = momentum_update(g, model.gradient(x, cls), lam)
        remaining = float(np.abs(xE - x).sum())
        if remaining <= eps:
            step = xE - x
        else:
            _, step = samp_select(g, x, xE, cfg.step_pixels)
            step = apply_infinitesimal_constraint(step, eta)
        done = step == xE - x
        x = x + step
        x[done] = xE[done]  # land exactly on finished coordinates
        a += g * step
        steps.append(step)
    dy = model.forward(xE, cls) - model.forward(xS, cls)
    return Attribution(a, float(dy)), PathSegments(xS, xE, tuple(steps))


def bidirectional_attribute(model, cls, x0, xT, cfg: SampConfig, x0_target=None) -> Attribution:
    """Sum of the to-baseline and to-target attributions.

    The to-baseline run integrates ``xT -> x0``, so its values are negated to
    explain ``f(xT) - f(x0)`` like the to-target run, which integrates
    ``x0_target -> xT`` (``x0_target`` defaults to ``x0``). Per-direction
    attributions and paths live in ``components``.
    """
    if cfg.direction != "both":
        raise InputError("bidirectional_attribute needs direction='both'")
    x0_target = x0 if x0_target is None else x0_target
    back, back_path = samp_attribute(model, cls, xT, x0, cfg)
    fwd, fwd_path = samp_attribute(model, cls, x0_target, xT, cfg)
    back = Attribution(-back.values, -back.delta_y)
    values = back.values + fwd.values
    total = back.delta_y + fwd.delta_y
    if cfg.halve_both:
        values = values / 2.0
        total = total / 2.0
    parts = {
        "to_baseline": back,
        "to_target": fwd,
        "to_baseline_path": back_path,
        "to_target_path": fwd_path,
    }
    return Attribution(values, back.delta_y, total, parts)


def attribute(model, cls, x0, xT, cfg: SampConfig, x0_target=None) -> Attribution:
    """Explain ``f(xT) - f(x0)`` in the direction(s) named by ``cfg``.

    ``x0_target`` optionally gives the to-target run its own start point.
    """
    if cfg.direction == "both":
        return bidirectional_attribute(model, cls, x0, xT, cfg, x0_target)
    if cfg.direction == "to_target":
        start = x0 if x0_target is None else x0_target
        att, path = samp_attribute(model, cls, start, xT, cfg)
        return Attribution(att.values, att.delta_y, components={"to_target": att, "to_target_path": path})
    att, path = samp_attribute(model, cls, xT, x0, cfg)
    back = Attribution(-att.values, -att.delta_y)
    return Attribution(back.values, back.delta_y, components={"to_baseline": back, "to_baseline_path": path})


def integrated_gradients(model, cls, x0, xT, n=64) -> Attribution:
    """Straight-line path attribution with ``n`` left-Riemann steps."""
    path = straight_line_path(x0, xT, n)
    att = integrate_path(model, cls, path)
    return Attribution(att.values, att.delta_y, components={"path": path})
