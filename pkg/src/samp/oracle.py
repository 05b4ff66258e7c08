"""Independent checks: exhaustive manipulation-path enumeration and Monte
Carlo estimates for the Brownian allocation model."""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InputError
from .paths import PathSegments, integrate_path, variance_objective

MAX_ENUM_DIM = 9


@dataclass(frozen=True)
class PathEnumeration:
    d: int
    s: int
    paths: list = field(repr=False)

    @property
    def count(self) -> int:
        return len(self.paths)

    @property
    def expected_count(self) -> int:
        q, r = divmod(self.d, self.s)
        return math.factorial(self.d) // (math.factorial(self.s) ** q * math.factorial(r))


def _ordered_partitions(items, s):
    if not items:
        yield ()
        return
    size = min(s, len(items))
    for block in itertools.combinations(items, size):
        rest = tuple(i for i in items if i not in block)
        for tail in _ordered_partitions(rest, s):
            yield (block,) + tail


def enumerate_paths(d, s) -> PathEnumeration:
    """All ordered partitions of ``range(d)`` into blocks of ``s`` indices.

    When ``s`` does not divide ``d`` the last block holds ``d % s`` indices.
    """
    if not 1 <= s <= d:
        raise InputError("need 1 <= s <= d")
    if d > MAX_ENUM_DIM:
        q, r = divmod(d, s)
        est = math.factorial(d) // (math.factorial(s) ** q * math.factorial(r))
        raise InputError(f"d={d} would enumerate {est} paths; limit is d <= {MAX_ENUM_DIM}")
    return PathEnumeration(d, s, list(_ordered_partitions(tuple(range(d)), s)))


def manipulation_path(x0, xT, blocks) -> PathSegments:
    """Path that moves each block of flat indices onto ``xT`` in turn."""
    x0 = np.asarray(x0, dtype=np.float64)
    xT = np.asarray(xT, dtype=np.float64)
    flat0, flatT = x0.ravel(), xT.ravel()
    steps = []
    for block in blocks:
        step = np.zeros_like(flat0)
        idx = list(block)
        step[idx] = flatT[idx] - flat0[idx]
        steps.append(step.reshape(x0.shape))
    return PathSegments(x0, xT, tuple(steps))


def path_blocks(path: PathSegments):
    """Index sets touched by each step of a path."""
    return [tuple(np.flatnonzero(np.ravel(s) != 0)) for s in path.steps]


def is_manipulation_path(path: PathSegments, s) -> bool:
    """True when the path is a member of the size-``s`` manipulation set.

    Each step must finish exactly ``min(s, remaining)`` coordinates, blocks
    must be disjoint and together cover every initially unfinished index.
    """
    x = np.array(path.start, dtype=np.float64).ravel()
    end = np.ravel(path.end)
    unfinished = set(np.flatnonzero(x != end).tolist())
    seen = set()
    for step in path.steps:
        step = np.ravel(step)
        touched = set(np.flatnonzero(step != 0).tolist())
        remaining = len(unfinished - seen)
        if len(touched) != min(s, remaining) or touched & seen or not touched <= unfinished:
            return False
        x = x + step
        if not np.allclose(x[list(touched)], end[list(touched)], rtol=0, atol=1e-12):
            return False
        seen |= touched
    return seen == unfinished


def brute_force_optimal(model, cls, x0, xT, s):
    """Score every manipulation path from ``x0`` to ``xT``.

    Returns ``(best_blocks, best_variance, variances)`` with ``variances``
    aligned to ``enumerate_paths(d, s).paths``.
    """
    x0 = np.asarray(x0, dtype=np.float64)
    enum = enumerate_paths(x0.size, s)
    variances = np.empty(enum.count)
    for i, blocks in enumerate(enum.paths):
        att = integrate_path(model, cls, manipulation_path(x0, xT, blocks))
        variances[i] = variance_objective(att.values)
    best = int(np.argmax(variances))
    return enum.paths[best], float(variances[best]), variances


# ---------------------------------------------------------------------------
# Brownian allocation model


@dataclass(frozen=True, eq=False)
class BrownianReport:
    """Moments of allocations ``a_1..a_{d-1}`` conditioned on their total.

    Estimates are means over equal batches; standard errors are the batch
    standard deviation over sqrt(batches).
    """

    d: int
    sigma: float
    C: float
    trials: int
    empirical_mean: np.ndarray
    mean_se: np.ndarray
    empirical_cov: np.ndarray
    cov_se: np.ndarray
    partial_sum_means: np.ndarray
    partial_sum_se: np.ndarray
    last_mean: float
    last_var: float

    @property
    def expected_mean(self):
        return np.full(self.d - 1, self.C / self.d)

    @property
    def expected_cov(self):
        n = self.d - 1
        return self.sigma * (np.eye(n) - np.ones((n, n)) / self.d)

    @property
    def expected_partial_sums(self):
        return np.arange(1, self.d) * self.C / self.d

    def checks(self, z=3.0) -> dict:
        """Pass/fail of each moment against its closed form at ``z`` standard errors."""
        off = ~np.eye(self.d - 1, dtype=bool)
        return {
            "mean": bool(np.all(np.abs(self.empirical_mean - self.expected_mean) <= z * self.mean_se)),
            "cov_offdiag": bool(np.all(np.abs(self.empirical_cov - self.expected_cov)[off] <= z * self.cov_se[off])),
            "cov_diag": bool(np.all(np.abs(np.diag(self.empirical_cov - self.expected_cov)) <= z * np.diag(self.cov_se))),
            "partial_sums": bool(np.all(np.abs(self.partial_sum_means - self.expected_partial_sums) <= z * self.partial_sum_se)),
        }

    def to_dict(self) -> dict:
        return {
            "d": self.d, "sigma": self.sigma, "C": self.C, "trials": self.trials,
            "empirical_mean": self.empirical_mean.tolist(),
            "mean_se": self.mean_se.tolist(),
            "empirical_cov": self.empirical_cov.tolist(),
            "cov_se": self.cov_se.tolist(),
            "partial_sum_means": self.partial_sum_means.tolist(),
            "partial_sum_se": self.partial_sum_se.tolist(),
            "last_mean": self.last_mean,
            "last_var": self.last_var,
            "checks": self.checks(),
        }


def _bridge_batches(d, sigma, C, trials, seed, batches):
    # a = z - (mean(z) - C/d) with z iid N(0, sigma) is exactly the law of
    # the increments conditioned on their sum being C
    sizes = [trials // batches + (1 if i < trials % batches else 0) for i in range(batches)]
    for size, child in zip(sizes, np.random.SeedSequence(seed).spawn(batches)):
        rng = np.random.default_rng(child)
        z = rng.normal(0.0, math.sqrt(sigma), size=(size, d))
        yield z - z.mean(axis=1, keepdims=True) + C / d


def sample_conditional_allocation(d, sigma, C, trials, seed=0, batches=100) -> BrownianReport:
    if trials < 10_000:
        raise InputError("need at least 10^4 trials")
    if sigma <= 0:
        raise InputError("sigma must be positive")
    if d < 2:
        raise InputError("need d >= 2")
    means, covs, psums, last_m, last_v = [], [], [], [], []
    for a in _bridge_batches(d, sigma, C, trials, seed, batches):
        free = a[:, : d - 1]
        means.append(free.mean(axis=0))
        covs.append(np.atleast_2d(np.cov(free, rowvar=False)))
        psums.append(np.cumsum(free, axis=1).mean(axis=0))
        last_m.append(a[:, -1].mean())
        last_v.append(a[:, -1].var(ddof=1))
    root = math.sqrt(batches)

    def est(stats):
        arr = np.array(stats)
        return arr.mean(axis=0), arr.std(axis=0, ddof=1) / root

    m, m_se = est(means)
    c, c_se = est(covs)
    p, p_se = est(psums)
    return BrownianReport(d, float(sigma), float(C), int(trials), m, m_se, c, c_se, p, p_se,
                          float(np.mean(last_m)), float(np.mean(last_v)))


def check_asymptotic_independence(d_list, sigma=1.0, trials=100_000, seed=0, batches=100, z=3.0):
    """Off-diagonal conditional correlation per dimension.

    The correlation among ``a_1..a_{d-1}`` is estimated as the mean
    off-diagonal covariance over the mean variance, both pooled over batches
    (a ratio of unbiased estimates, so the small-sample bias of per-batch
    correlations does not enter). Its standard error comes from the
    linearized batch means. Each row also reports the largest absolute
    off-diagonal entry of the pooled correlation matrix and the closed form
    ``-1/(d-1)``. ``d = 2`` has no off-diagonal entries.
    """
    d_list = list(d_list)
    if d_list != sorted(d_list):
        raise InputError("d_list must be ascending")
    rows = []
    for d in d_list:
        if d <= 2:
            rows.append({"d": d, "mean_corr": None, "se": None, "max_abs_corr": 0.0,
                         "expected": None, "within_se": True})
            continue
        off_mask = ~np.eye(d - 1, dtype=bool)
        cov_b, var_b, pooled = [], [], np.zeros((d - 1, d - 1))
        for a in _bridge_batches(d, sigma, 0.0, trials, seed, batches):
            cov = np.cov(a[:, : d - 1], rowvar=False)
            cov_b.append(cov[off_mask].mean())
            var_b.append(np.diag(cov).mean())
            pooled += cov
        cov_b, var_b = np.array(cov_b), np.array(var_b)
        corr = float(cov_b.mean() / var_b.mean())
        se = float(np.std((cov_b - corr * var_b) / var_b.mean(), ddof=1) / math.sqrt(batches))
        pooled /= batches
        scale = np.sqrt(np.diag(pooled))
        pooled_corr = pooled / np.outer(scale, scale)
        expected = -1.0 / (d - 1)
        rows.append({
            "d": d,
            "mean_corr": corr,
            "se": se,
            "max_abs_corr": float(np.max(np.abs(pooled_corr[off_mask]))),
            "expected": expected,
            "within_se": bool(abs(corr - expected) <= z * se),
        })
    mags = [abs(r["mean_corr"]) for r in rows if r["mean_corr"] is not None]
    decreasing = all(b < a for a, b in zip(mags, mags[1:]))
    return rows, decreasing


def optimality_study(n_instances=100, seed=0, d=4, hidden=8, s=1, linear=False):
    """SAMP against the exhaustive optimum on seeded random models.

    Each instance draws a model (an MLP ``d -> hidden -> 1``, or a linear
    model when ``linear``), ``x0 = 0`` and ``xT ~ U[0, 1]^d``, then runs SAMP
    with unbounded steps and no momentum. Returns one dict per instance.
    """
    from .models import build_linear_model, build_mlp
    from .paths import SampConfig, samp_attribute

    cfg = SampConfig(step_pixels=s, eta_ratio=None, momentum=0.0, direction="to_target")
    rng = np.random.default_rng(seed)
    records = []
    for i in range(n_instances):
        if linear:
            model = build_linear_model(rng.normal(size=d), rng.normal())
        else:
            model = build_mlp((d, hidden, 1), seed=int(rng.integers(2**31)))
        x0 = np.zeros(d)
        xT = rng.uniform(0.0, 1.0, size=d)
        _, best, variances = brute_force_optimal(model, 0, x0, xT, s)
        att, path = samp_attribute(model, 0, x0, xT, cfg)
        v = variance_objective(att.values)
        records.append({
            "instance": i,
            "samp_variance": v,
            "best_variance": best,
            "median_variance": float(np.median(variances)),
            "ratio": v / best if best > 0 else 1.0,
            "valid_path": is_manipulation_path(path, s),
        })
    return records
