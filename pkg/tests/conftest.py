import pytest

from fastdiff_shock.flux import FluxModel
from fastdiff_shock.profile import build_profile

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def burgers():
    return FluxModel.burgers(2.0, 0.75)


@pytest.fixture(scope="session")
def profile(burgers):
    return build_profile(burgers)


@pytest.fixture(scope="session")
def poly():
    return FluxModel.polynomial((0.5, 0.1, 0.0), 2.0, 0.75)


@pytest.fixture(scope="session")
def poly_profile(poly):
    return build_profile(poly)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
