import numpy as np
import pytest

from ransomgate.simulator import SimConfig, generate_corpus
from ransomgate.trace import Trace

# Fixed seed for the simulated evaluation corpus used by the acceptance suite.
ACCEPTANCE_SEED = 20240

_criteria = []


def record_criterion(number, passed, detail):
    line = f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}"
    _criteria.append(line)
    print(line)


def pytest_terminal_summary(terminalreporter):
    if _criteria:
        terminalreporter.section("acceptance criteria")
        for line in _criteria:
            terminalreporter.write_line(line)


@pytest.fixture
def small_trace():
    return Trace(
        machine_id="t0",
        feature_names=("a", "b"),
        samples=np.array([[0.0, 0.0], [4.0, 1.0], [6.0, 3.0]]),
        created_at="2024-01-01T00:00:00+00:00",
    )


def sim_corpus():
    """40 test-positive (parallel ransomware) and 36 test-negative traces."""
    cfg = SimConfig(seed=ACCEPTANCE_SEED)
    pos = generate_corpus("h1a", 40, 1, cfg, seed=ACCEPTANCE_SEED)
    neg = generate_corpus("h0", 36, 1, cfg, seed=ACCEPTANCE_SEED + 1)
    return pos, neg


@pytest.fixture(scope="session")
def corpus():
    return sim_corpus()


@pytest.fixture(scope="session")
def positives(corpus):
    return corpus[0]


@pytest.fixture(scope="session")
def negatives(corpus):
    return corpus[1]
