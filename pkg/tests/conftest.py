import numpy as np
import pytest

from lsimdp import LsiModel, example_model

# lines collected by test_acceptance and echoed after the run
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def sec6():
    return example_model()


def scalar_model(cost=1.0, discount=0.5):
    """One observed state, one hidden state, one action."""
    return LsiModel(np.ones((1, 1, 1, 1, 1)), np.full((1, 1, 1), cost), discount, [1.0], [1.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
