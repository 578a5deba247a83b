import numpy as np
import pytest

from mkelab.measures import DiscreteMeasure


@pytest.fixture
def rng():
    return np.random.default_rng(20240607)


def random_measure(rng, n, d, uniform=False):
    w = np.full(n, 1.0 / n) if uniform else rng.random(n) + 0.05
    return DiscreteMeasure(rng.random((n, d)), w / w.sum())


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
