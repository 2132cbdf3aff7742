import warnings
from pathlib import Path

import numpy as np
import pytest

from entmeas.polytope import enumerate_facets, enumerate_vertices

DATA = Path(__file__).resolve().parents[1] / "src" / "entmeas" / "data"


@pytest.fixture(scope="session")
def data_dir():
    return DATA


@pytest.fixture(scope="session")
def vertices3():
    return enumerate_vertices(3)


@pytest.fixture(scope="session")
def vertices4():
    return enumerate_vertices(4)


@pytest.fixture(scope="session")
def facets3(vertices3):
    return enumerate_facets(vertices3)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_configure(config):
    # small-N scenarios are legitimate test inputs
    warnings.filterwarnings("ignore", message="N=.* <= D=2")


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is not None and mod.REPORT:
        terminalreporter.section("acceptance criteria")
        for line in mod.REPORT:
            terminalreporter.write_line(line)
