import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import Bilinear
from samp.errors import InputError
from samp.models import build_linear_model, build_mlp
from samp.oracle import (
    brute_force_optimal,
    check_asymptotic_independence,
    enumerate_paths,
    is_manipulation_path,
    manipulation_path,
    optimality_study,
    path_blocks,
    sample_conditional_allocation,
)
from samp.paths import PathSegments, SampConfig, samp_attribute, variance_objective


@pytest.mark.parametrize("d,s,count", [(4, 1, 24), (4, 2, 6), (1, 1, 1), (6, 3, 20), (6, 2, 90), (5, 2, 30)])
def test_enumeration_counts(d, s, count):
    e = enumerate_paths(d, s)
    assert e.count == count == e.expected_count
    assert len(set(e.paths)) == count


def test_enumeration_counts_formula():
    for d in range(1, 7):
        for s in range(1, d + 1):
            if d % s == 0:
                n = d // s
                assert enumerate_paths(d, s).count == math.factorial(d) // math.factorial(s) ** n


def test_enumeration_blocks_partition():
    for blocks in enumerate_paths(5, 2).paths:
        flat = [i for b in blocks for i in b]
        assert sorted(flat) == list(range(5))
        assert [len(b) for b in blocks] == [2, 2, 1]


def test_enumeration_limit_reports_size():
    with pytest.raises(InputError, match="3628800"):
        enumerate_paths(10, 1)
    with pytest.raises(InputError):
        enumerate_paths(3, 4)


def test_manipulation_path_membership():
    x0, xT = np.zeros(4), np.array([1.0, 2.0, 3.0, 4.0])
    for blocks in enumerate_paths(4, 2).paths:
        p = manipulation_path(x0, xT, blocks)
        assert is_manipulation_path(p, 2)
        assert path_blocks(p) == [tuple(b) for b in blocks]
        assert p.telescoping_error() == 0.0
    half = PathSegments(x0, xT, (xT / 2, xT / 2))
    assert not is_manipulation_path(half, 4)
    overlap = PathSegments(x0, xT, (np.array([1.0, 0, 0, 0]), np.array([0.0, 2, 3, 4])))
    assert not is_manipulation_path(overlap, 1)


def test_brute_force_linear_all_equal():
    m = build_linear_model([1.0, -3.0, 2.0, 0.5])
    x0, xT = np.zeros(4), np.array([1.0, 0.5, 0.25, 2.0])
    _, best, variances = brute_force_optimal(m, 0, x0, xT, 1)
    np.testing.assert_allclose(variances, variances[0], atol=1e-12)
    att, _ = samp_attribute(m, 0, x0, xT, SampConfig(1, None, 0.0, "to_target"))
    assert abs(variance_objective(att) - best) < 1e-12


def test_brute_force_bilinear():
    blocks, best, variances = brute_force_optimal(Bilinear(), 0, np.zeros(2), np.ones(2), 1)
    np.testing.assert_array_equal(variances, [0.25, 0.25])
    assert best == 0.25
    att, _ = samp_attribute(Bilinear(), 0, np.zeros(2), np.ones(2), SampConfig(1, None, 0.0, "to_target"))
    assert variance_objective(att) == best


def test_samp_never_exceeds_optimum():
    for r in optimality_study(25, seed=3) + optimality_study(10, seed=4, linear=True):
        assert r["samp_variance"] <= r["best_variance"] + 1e-9
        assert r["valid_path"]


@settings(max_examples=20, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from([1, 2]))
def test_samp_bounded_by_bruteforce_property(seed, s):
    rng = np.random.default_rng(seed)
    m = build_mlp((4, 5, 1), seed=seed, activation="tanh")
    x0, xT = rng.uniform(size=4), rng.uniform(size=4)
    _, best, _ = brute_force_optimal(m, 0, x0, xT, s)
    att, path = samp_attribute(m, 0, x0, xT, SampConfig(s, None, 0.0, "to_target"))
    assert variance_objective(att) <= best + 1e-9
    assert is_manipulation_path(path, s)


def test_brownian_moments():
    rep = sample_conditional_allocation(5, 1.0, 0.0, 200_000, seed=1)
    checks = rep.checks()
    assert all(checks.values()), checks
    np.testing.assert_allclose(rep.expected_cov[0], [0.8, -0.2, -0.2, -0.2])
    # the last allocation closes the total
    assert rep.last_mean == pytest.approx(0.0, abs=0.01)
    assert rep.last_var == pytest.approx(0.8, rel=0.02)


def test_brownian_partial_sums_are_linear():
    rep = sample_conditional_allocation(5, 1.0, 10.0, 100_000, seed=2)
    np.testing.assert_allclose(rep.expected_partial_sums, [2.0, 4.0, 6.0, 8.0])
    assert rep.checks()["partial_sums"]


def test_brownian_sigma_scales_covariance():
    rep = sample_conditional_allocation(4, 2.5, 0.0, 100_000, seed=3)
    assert rep.checks()["cov_offdiag"]
    assert rep.expected_cov[0, 1] == pytest.approx(-2.5 / 4)


def test_brownian_is_seeded():
    a = sample_conditional_allocation(3, 1.0, 1.0, 10_000, seed=5)
    b = sample_conditional_allocation(3, 1.0, 1.0, 10_000, seed=5)
    np.testing.assert_array_equal(a.empirical_cov, b.empirical_cov)


def test_brownian_validation():
    with pytest.raises(InputError):
        sample_conditional_allocation(5, 1.0, 0.0, 100)
    with pytest.raises(InputError):
        sample_conditional_allocation(5, 0.0, 0.0, 10_000)
    with pytest.raises(InputError):
        sample_conditional_allocation(1, 1.0, 0.0, 10_000)


def test_independence_rows():
    rows, decreasing = check_asymptotic_independence([2, 10, 100], trials=50_000, seed=0)
    assert rows[0]["mean_corr"] is None and rows[0]["max_abs_corr"] == 0.0
    assert decreasing
    for r in rows[1:]:
        assert r["within_se"], r
        assert r["expected"] == pytest.approx(-1.0 / (r["d"] - 1))
    assert abs(rows[2]["mean_corr"]) < abs(rows[1]["mean_corr"])


def test_independence_needs_ascending():
    with pytest.raises(InputError):
        check_asymptotic_independence([10, 5])
