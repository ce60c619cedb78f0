import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gadtune.graph import generate_synthetic
from gadtune.injection import InjectionPlan, inject


@pytest.fixture(scope="session")
def small_graph():
    return generate_synthetic(40, 6, 2, 0.2, 0.02, seed=3)


@pytest.fixture(scope="session")
def injected_small():
    g = generate_synthetic(60, 8, 3, 0.15, 0.01, seed=5)
    return inject(g, InjectionPlan(clique_size=4, clique_count=1, contextual_count=4, candidate_pool=10, seed=1))


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    from acceptance_log import RESULTS

    if RESULTS:
        terminalreporter.section("acceptance criteria")
        for number in sorted(RESULTS):
            terminalreporter.write_line(RESULTS[number])
