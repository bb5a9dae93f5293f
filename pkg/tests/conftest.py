import numpy as np
import pytest

from stiefel_fs.objective import build_problem


def random_problem(d, k, n, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((d, n))
    labels = np.arange(n) % k
    rng.shuffle(labels)
    X[: min(3, d)] += rng.standard_normal((min(3, d), k))[:, labels]
    Y = np.zeros((k, n))
    Y[labels, np.arange(n)] = 1.0
    return build_problem(X, Y)


def random_stiefel(d, k, rng):
    Q, _ = np.linalg.qr(rng.standard_normal((d, k)))
    return Q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    try:
        from test_acceptance import RESULTS
    except ImportError:
        return
    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in RESULTS:
            terminalreporter.write_line(line)
