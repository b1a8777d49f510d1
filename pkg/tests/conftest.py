import pytest

_CRITERIA = []


@pytest.fixture
def record_criterion():
    """Collects one pass/fail line per acceptance criterion for the summary."""
    def record(label, passed, detail=""):
        _CRITERIA.append(f"{'PASS' if passed else 'FAIL'}  {label}  {detail}".rstrip())
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
