import pytest

from d2dunderlay.netmodel import SystemConfig

ACCEPTANCE_LINES: dict[int, str] = {}


@pytest.fixture
def dense():
    return SystemConfig()


@pytest.fixture
def sparse():
    return SystemConfig(density_per_m2=2e-5)


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
