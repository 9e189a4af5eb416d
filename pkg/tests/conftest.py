import pytest

from denokat.kernel import ValueDomain

# one line per acceptance criterion, filled by test_acceptance.py
ACCEPTANCE_LINES: dict = {}


@pytest.fixture
def dom():
    return ValueDomain(3, ("x", "y"))


@pytest.fixture
def dom1():
    return ValueDomain(3, ("x",))


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE_LINES):
        terminalreporter.write_line(ACCEPTANCE_LINES[k])
