import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from gcurv.fields import AmbientStructure, Chart, DilatonField, MetricField, ThreeFormField  # noqa: E402
from gcurv.hypersurface import EmbeddingMap  # noqa: E402
from gcurv.scenarios import _graph_embedding, _random_fields  # noqa: E402


def euclidean(d: int, H: dict | None = None, X=None, xi=None) -> AmbientStructure:
    names = ("x", "y", "z", "w")[:d]
    chart = Chart(f"R{d}", names)
    rows = [["1" if i == j else "0" for j in range(d)] for i in range(d)]
    g = MetricField.from_strings(chart, rows, (d, 0))
    return AmbientStructure(chart, g, ThreeFormField.from_strings(chart, H or {}), DilatonField.from_strings(chart, X, xi))


def random_ambient(seed: int, d: int, exact: bool = False) -> AmbientStructure:
    return _random_fields(seed, d, exact)


def graph_embedding(amb: AmbientStructure) -> EmbeddingMap:
    return _graph_embedding(amb.chart)


def sample_point(seed: int, dim: int, radius: float = 0.25) -> list[float]:
    return list(np.random.default_rng(seed).uniform(-radius, radius, dim))


@pytest.fixture
def flat3():
    return euclidean(3)


@pytest.fixture
def sphere2():
    amb = euclidean(3)
    sigma = Chart("S2", ("t", "p"))
    return amb, EmbeddingMap.from_strings(sigma, amb.chart, ["sin(t)*cos(p)", "sin(t)*sin(p)", "cos(t)"])


def pytest_terminal_summary(terminalreporter):
    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(results, key=lambda n: int(n.split()[0][1:])):
        terminalreporter.write_line(results[name])
