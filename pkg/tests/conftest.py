import numpy as np
import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=100,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile("default")


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_graph_adjacency(rng, n, p=0.4, weighted=False):
    """Symmetric zero-diagonal adjacency with Bernoulli(p) edges."""
    upper = np.triu(rng.random((n, n)) < p, 1).astype(float)
    if weighted:
        upper *= rng.uniform(0.1, 2.0, size=(n, n))
    return upper + upper.T


def connected_unit_graph(rng, n, p=0.3):
    """Unit-weight graph with a random spanning tree plus Bernoulli(p) extras."""
    a = random_graph_adjacency(rng, n, p)
    order = rng.permutation(n)
    for i in range(1, n):
        u, v = order[i], order[rng.integers(0, i)]
        a[u, v] = a[v, u] = 1.0
    return a


ACCEPTANCE_LINES: list[str] = []


def report(criterion: int, passed: bool, detail: str) -> bool:
    """Record and print one acceptance verdict line."""
    line = f"[{'PASS' if passed else 'FAIL'}] criterion {criterion}: {detail}"
    print(line)
    ACCEPTANCE_LINES.append(line)
    return passed


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.write_sep("=", "acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[2].rstrip(":"))):
            terminalreporter.write_line(line)
