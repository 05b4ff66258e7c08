import json
from pathlib import Path

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from _util import Quadratic, grad_rel_error, near_kink
from samp.errors import InputError, NumericError
from samp.models import (
    Model,
    SumModel,
    build_counting_model,
    build_linear_model,
    build_mlp,
    finite_diff_gradient,
    forward,
    gradient,
    load_model,
    save_model,
)

DATA = Path(__file__).parent / "data"


def test_linear_forward_and_gradient():
    m = build_linear_model([1.0, 2.0, 3.0], 0.0)
    assert forward(m, np.ones(3)) == 6.0
    for x in (np.zeros(3), np.array([5.0, -2.0, 0.3])):
        np.testing.assert_array_equal(gradient(m, x), [1.0, 2.0, 3.0])


def test_relu_2_2_2_hand_gradient():
    W0 = np.array([[1.0, 2.0], [3.0, -1.0]])
    W1 = np.array([[1.0, -1.0], [2.0, 0.5]])
    m = Model("mlp", {"W0": W0, "b0": [0.5, 1.0], "W1": W1, "b1": [0.0, 0.0]}, (2,), 2)
    x = np.array([1.0, 1.0])
    # pre-activations (4.5, 2.0) are both positive, so grad = W0 @ W1[:, c]
    np.testing.assert_allclose(m.gradient(x, 0), [5.0, 1.0])
    np.testing.assert_allclose(m.gradient(x, 1), [0.0, -3.5])
    assert m.forward(x, 0) == pytest.approx(4.5 + 4.0)


def test_quadratic_finite_difference():
    assert finite_diff_gradient(Quadratic(), np.array([3.0]), h=1e-5)[0] == pytest.approx(6.0, abs=1e-8)


def test_linear_finite_difference_exact_for_any_h():
    m = build_linear_model([0.5, -2.0, 4.0])
    x = np.array([0.1, 0.2, 0.3])
    for h in (1e-7, 1e-3, 0.5):
        np.testing.assert_allclose(finite_diff_gradient(m, x, h=h), [0.5, -2.0, 4.0], rtol=1e-8)


def test_finite_difference_rejects_bad_step():
    with pytest.raises(InputError):
        finite_diff_gradient(build_linear_model([1.0]), np.zeros(1), h=0.0)


@pytest.mark.parametrize("activation", ["relu", "tanh"])
def test_mlp_gradient_matches_finite_differences(activation):
    rng = np.random.default_rng(7)
    m = build_mlp((6, 5, 4, 3), seed=1, activation=activation)
    checked = 0
    while checked < 10:
        x = rng.uniform(-1, 1, 6)
        if near_kink(m, x):
            continue
        for c in range(3):
            assert grad_rel_error(m, x, c) < 1e-4
        checked += 1


def test_fixture_gradient_matches_finite_differences(fixture_model, blob_data):
    for x in blob_data.inputs[:5]:
        if not near_kink(fixture_model, x):
            assert grad_rel_error(fixture_model, x, 0) < 1e-4


def test_gradient_keeps_input_shape():
    m = build_mlp((16, 4, 2), seed=0, input_shape=(4, 4))
    assert m.gradient(np.zeros((4, 4)), 1).shape == (4, 4)
    assert m.gradient(np.zeros(16), 1).shape == (16,)


def test_golden_fixture_score():
    golden = json.loads((DATA / "golden_mlp.json").read_text())
    m = load_model(DATA / "fixture_mlp.json")
    x = np.array(golden["input"])
    c = golden["class"]
    assert m.forward(x, c) == pytest.approx(golden["score"], abs=1e-9)

    # independent scalar-by-scalar forward pass
    W0, b0, W1, b1 = (m.params[k] for k in ("W0", "b0", "W1", "b1"))
    hidden = []
    for j in range(W0.shape[1]):
        acc = b0[j]
        for i in range(W0.shape[0]):
            acc += x[i] * W0[i, j]
        hidden.append(max(acc, 0.0))
    out = b1[c]
    for j, hj in enumerate(hidden):
        out += hj * W1[j, c]
    assert out == pytest.approx(golden["score"], abs=1e-9)


def test_counting_all_on_target():
    m = build_counting_model((5, 5))
    assert m.forward(np.ones((5, 5))) == pytest.approx(25.0, abs=1e-12)


def test_counting_far_from_target():
    m = build_counting_model((5, 5), tolerance=0.05)
    x = np.full((5, 5), 1.0 - 5 * 0.05 - 1e-9)
    assert m.forward(x) < 1e-6 * 25


def test_counting_half_on_target():
    m = build_counting_model((4, 4))
    x = np.zeros((4, 4))
    x[:2] = 1.0
    assert m.forward(x) == pytest.approx(8.0, rel=0.01)


def test_counting_k_pixels():
    m = build_counting_model((6, 6))
    rng = np.random.default_rng(0)
    for k in (0, 3, 11):
        x = rng.uniform(0.0, 0.5, (6, 6))
        x.flat[rng.choice(36, k, replace=False)] = 1.0
        assert m.forward(x) == pytest.approx(k, abs=1e-6)


def test_counting_colour_target():
    m = build_counting_model((3, 3, 3), target_value=(0.0, 0.0, 1.0))
    x = np.zeros((3, 3, 3))
    x[0, 0] = (0.0, 0.0, 1.0)
    x[1, 1] = (0.0, 0.0, 1.0)
    assert m.forward(x) == pytest.approx(2.0, abs=1e-9)
    assert grad_rel_error(m, x + 0.02, 0) < 1e-4


def test_sum_model_adds_logits():
    a = build_linear_model([1.0, 2.0])
    b = build_mlp((2, 3, 1), seed=4)
    s = SumModel([a, b])
    x = np.array([0.3, -0.7])
    assert s.forward(x) == pytest.approx(a.forward(x) + b.forward(x), abs=1e-12)
    np.testing.assert_allclose(s.gradient(x), a.gradient(x) + b.gradient(x), atol=1e-12)


def test_sum_model_rejects_mismatch():
    with pytest.raises(InputError):
        SumModel([build_linear_model([1.0, 2.0]), build_linear_model([1.0, 2.0, 3.0])])


def test_input_validation():
    m = build_linear_model([1.0, 2.0])
    with pytest.raises(InputError):
        m.forward(np.zeros(3))
    with pytest.raises(InputError):
        m.forward(np.zeros(2), cls=1)
    with pytest.raises(NumericError):
        m.forward(np.array([np.nan, 0.0]))


def test_params_are_read_only():
    m = build_mlp((3, 2), seed=0)
    with pytest.raises(ValueError):
        m.params["W0"][0, 0] = 1.0


@pytest.mark.parametrize("factory", [
    lambda: build_mlp((9, 4, 3), seed=2, activation="tanh", input_shape=(3, 3)),
    lambda: build_linear_model(np.arange(6.0).reshape(3, 2), [1.0, -1.0]),
    lambda: build_counting_model((2, 3), target_value=0.5, tolerance=0.1),
    lambda: SumModel([build_linear_model([1.0, 2.0]), build_mlp((2, 3, 1), seed=1)]),
])
def test_save_load_roundtrip(tmp_path, factory):
    m = factory()
    files = save_model(m, tmp_path / "m.json")
    assert all(f.exists() for f in files)
    back = load_model(tmp_path / "m.json")
    x = np.random.default_rng(0).uniform(size=m.input_dim)
    np.testing.assert_array_equal(back.logits(x), m.logits(x))
    assert back.input_shape == m.input_shape


def test_save_is_byte_deterministic(tmp_path):
    m = build_mlp((4, 3, 2), seed=5)
    save_model(m, tmp_path / "a" / "m.json")
    save_model(m, tmp_path / "b" / "m.json")
    for f in (tmp_path / "a").iterdir():
        assert f.read_bytes() == (tmp_path / "b" / f.name).read_bytes()


def test_load_missing(tmp_path):
    with pytest.raises(InputError, match="not found"):
        load_model(tmp_path / "none.json")


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**31 - 1), st.sampled_from(["relu", "tanh"]))
def test_random_mlp_gradients_property(seed, activation):
    m = build_mlp((5, 6, 2), seed=seed, activation=activation)
    x = np.random.default_rng(seed).uniform(-1, 1, 5)
    if not near_kink(m, x):
        assert grad_rel_error(m, x, seed % 2) < 1e-4
