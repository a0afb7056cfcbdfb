import sys
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from genreedy import generators as gen

sys.path.insert(0, str(Path(__file__).parent))

settings.register_profile("repo", deadline=None, derandomize=True, max_examples=25,
                          suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture])
settings.load_profile("repo")


@pytest.fixture(scope="session")
def simplex2():
    return gen.simplex_trunc(2)


@pytest.fixture(scope="session")
def simplex3():
    return gen.simplex_trunc(3)


@pytest.fixture(scope="session")
def cyclic2():
    return gen.cyclic_trunc(2)


@pytest.fixture(scope="session")
def symmetric2():
    return gen.sym_trunc(2)


def simplex_morphism(C, m, n, values):
    """The monotone map ``[m] -> [n]`` with the given values."""
    return C.index((m, n, tuple(values)))


@pytest.fixture(scope="session")
def smap():
    return simplex_morphism


# The acceptance module stores its report here so the summary can print one line per criterion.
ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
