import pytest

from qghjm.curve import ForwardCurve, ModelParams

SIGMA, LAMBDA0 = 0.2, 0.05


@pytest.fixture
def flat():
    return ForwardCurve.flat(LAMBDA0)


@pytest.fixture
def headline(flat):
    return ModelParams(SIGMA, 0.0, flat)


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in sorted(mod.RESULTS, key=lambda s: int(s.split("[")[1].split("]")[0])):
        terminalreporter.write_line(line)
