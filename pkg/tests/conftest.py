import warnings

import pytest

from igs.graph import ColoredDigraph
from igs.system import load_bundled

ACCEPTANCE = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        terminalreporter.write_line(ACCEPTANCE[k])


def _load(name):
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        return load_bundled(name)


@pytest.fixture(scope="session")
def det():
    return _load("pentagon_decagon")


@pytest.fixture(scope="session")
def rnd():
    return _load("random_two_color")


@pytest.fixture(scope="session")
def comb():
    return _load("comb")


def path_graph(n):
    return ColoredDigraph.from_arcs([(i, i + 1, 1) for i in range(n - 1)], 1)


def cycle_graph(n):
    return ColoredDigraph.from_arcs([(i, (i + 1) % n, 1) for i in range(n)], 1)
