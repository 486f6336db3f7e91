import numpy as np
import pytest

from valleyscape import Domain, elliptic_valley, sphere


@pytest.fixture
def fe():
    """x1**2 + (0.1 x2)**2."""
    return elliptic_valley(0.01)


@pytest.fixture
def fs():
    return sphere(2)


@pytest.fixture
def square10():
    return Domain([-10.0, -10.0], [10.0, 10.0])


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


_ACCEPTANCE_LINES: list[str] = []


@pytest.fixture
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_ACCEPTANCE_LINES, key=lambda s: int(s.split()[1][1:])):
            terminalreporter.write_line(line)
