"""Shared test fixtures and the acceptance-criteria report hook."""

import pytest

_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_lines():
    """Sink for one PASS/FAIL line per acceptance criterion."""
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
