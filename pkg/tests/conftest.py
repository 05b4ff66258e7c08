import sys

import numpy as np
import pytest

from samp.models import build_mlp
from samp.training import make_blob_dataset, train_fixture


@pytest.fixture(scope="session")
def blob_data():
    return make_blob_dataset(n=400, side=8, seed=0)


@pytest.fixture(scope="session")
def fixture_model(blob_data):
    model = build_mlp((64, 16, 2), seed=0, input_shape=(8, 8))
    return train_fixture(model, blob_data, epochs=200, seed=0)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def pytest_terminal_summary(terminalreporter):
    mod = sys.modules.get("test_acceptance")
    results = getattr(mod, "RESULTS", None)
    if results:
        terminalreporter.section("acceptance criteria")
        for n in sorted(results):
            terminalreporter.write_line(results[n])
