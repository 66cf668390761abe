import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from tests import test_acceptance as acc  # noqa: F401
    if acc.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in acc.RESULTS:
            terminalreporter.write_line(line)
