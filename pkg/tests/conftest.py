import pytest

from epr_sfg.metrics import OperatingPoint
from epr_sfg.transfer import SfgParams


@pytest.fixture
def standard():
    """Figure parameters: gamma3/gamma1 = 1, rho/gamma1 = 0.1, chi E/gamma1 = 1."""
    return SfgParams.from_ratios(gamma3=1.0, rho1=0.1, rho3=0.1, pump=1.0)


@pytest.fixture
def lossless():
    return SfgParams.from_ratios(gamma3=1.0, rho1=0.0, rho3=0.0, pump=1.0)


@pytest.fixture
def standard_op(standard):
    return OperatingPoint(standard, 0.6)


def pytest_terminal_summary(terminalreporter):
    import sys

    mod = sys.modules.get("test_acceptance")
    lines = getattr(mod, "RESULTS", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
