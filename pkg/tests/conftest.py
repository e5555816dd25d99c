import sys

import pytest

from toposmodal.model import fixture_path, load_model
from toposmodal.order import FinPoset

W4_COVERS = [("e-1", "e0"), ("e0", "e1"), ("e0", "e2")]


@pytest.fixture(scope="session")
def w4_poset():
    return FinPoset.from_covers(["e-1", "e0", "e1", "e2"], W4_COVERS)


@pytest.fixture(scope="session")
def w4():
    return load_model(fixture_path("w4.json"))


@pytest.fixture(scope="session")
def fork():
    return load_model(fixture_path("fork.json"))


@pytest.fixture(scope="session")
def chain6():
    return load_model(fixture_path("chain6.json"))


@pytest.fixture(scope="session")
def chain5():
    return load_model(fixture_path("chain5.json"))


@pytest.fixture(scope="session")
def asym():
    return load_model(fixture_path("asym.json"))


def pytest_terminal_summary(terminalreporter):
    mod = next((m for name, m in sys.modules.items() if name.endswith("test_acceptance")), None)
    lines = getattr(mod, "RESULTS", [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
