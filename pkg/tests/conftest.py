import numpy as np
import pytest

from ridgegrid import Domain, build_grid


@pytest.fixture
def space_time():
    return Domain((0.0, -1.0), (1.0, 1.0))


@pytest.fixture
def unit_line():
    return Domain((0.0,), (1.0,))


@pytest.fixture
def grid33(space_time):
    return build_grid(space_time, 33)


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def report():
    """Record the verdict line of one acceptance criterion."""

    def _report(number, ok, detail):
        line = f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"
        ACCEPTANCE_LINES[number] = line
        print(line)
        return ok

    return _report


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for n in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(ACCEPTANCE_LINES[n])
