import pytest

from clwn import checks


@pytest.fixture(scope="session")
def group():
    return checks.test_group()


@pytest.fixture(scope="session")
def ctx():
    return checks.test_context()


def pytest_terminal_summary(terminalreporter):
    import sys
    mod = sys.modules.get("test_acceptance") or sys.modules.get("tests.test_acceptance")
    if mod is None or not mod.LINES:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.LINES:
        terminalreporter.write_line(line)
