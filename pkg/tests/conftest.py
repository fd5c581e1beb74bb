from pathlib import Path

import pytest

from subid import parse_graph

GRAPH_DIR = Path(__file__).resolve().parents[1] / "graphs"

# one line per acceptance criterion, filled by tests/test_acceptance.py and
# echoed after the run summary so the verdicts survive output capturing
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


def load_graph(name):
    return parse_graph((GRAPH_DIR / f"{name}.g").read_text()).graph


@pytest.fixture(scope="session")
def id_classic():
    return load_graph("id_classic")


@pytest.fixture(scope="session")
def medication():
    return load_graph("medication")


@pytest.fixture(scope="session")
def hedges():
    return load_graph("hedges")


@pytest.fixture(scope="session")
def recoverability():
    return load_graph("recoverability")


@pytest.fixture(scope="session")
def latent_selection():
    return load_graph("latent_selection")


@pytest.fixture(scope="session")
def demo_graph():
    return load_graph("demo")
