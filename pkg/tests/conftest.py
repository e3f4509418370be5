import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from biogibbs import ScenarioRecipe, build_system, build_triple  # noqa: E402
from biogibbs.sampling import make_rng, random_operator  # noqa: E402

LN2 = math.log(2.0)


def scenario(kind, dim, **kw):
    sys_ = build_system(ScenarioRecipe(kind, dim, **kw))
    return sys_, build_triple(sys_)


@pytest.fixture(params=["identity", "projector", "diagonal", "random_riesz"])
def any_scenario(request):
    extra = {"seed": 42} if request.param == "random_riesz" else {}
    return scenario(request.param, 8, **extra)


@pytest.fixture
def riesz16():
    return scenario("random_riesz", 16, seed=42)


@pytest.fixture
def projector8():
    return scenario("projector", 8)


@pytest.fixture
def rng():
    return make_rng(2024, "tests")


def random_pairs(seed, dim, count, label="pairs"):
    r = make_rng(seed, label)
    return [(random_operator(r, dim), random_operator(r, dim)) for _ in range(count)]


def basis_projector(dim, k=0):
    p = np.zeros((dim, dim), dtype=complex)
    p[k, k] = 1.0
    return p


_acceptance_lines: list[str] = []


def record_criterion(line: str) -> None:
    print(line)
    _acceptance_lines.append(line)


def pytest_terminal_summary(terminalreporter):
    if _acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_acceptance_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
