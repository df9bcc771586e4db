import os
import sys

import numpy as np
import pytest

sys.path.insert(0, os.path.dirname(__file__))

from silopt.core import validate_dissimilarity  # noqa: E402

E4 = np.array([[0, 1, 10, 10], [1, 0, 10, 10], [10, 10, 0, 1], [10, 10, 1, 0]], dtype=float)


@pytest.fixture
def e4():
    return validate_dissimilarity(E4)


def random_instance(rng, n, k, p=2):
    X = rng.normal(size=(n, p))
    D = np.sqrt(((X[:, None, :] - X[None, :, :]) ** 2).sum(axis=2))
    codes = rng.integers(0, k, size=n)
    codes[rng.permutation(n)[:k]] = np.arange(k)
    return validate_dissimilarity(D), codes


# PASS/FAIL lines recorded by the acceptance tests, echoed at the end of the run
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
