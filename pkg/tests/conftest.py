import pytest

# filled by test_acceptance.py: (criterion, passed, summary, detail lines)
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    tr = terminalreporter
    tr.section("acceptance criteria")
    for crit, ok, summary, details in sorted(ACCEPTANCE_LINES, key=lambda r: r[0]):
        tr.write_line(f"[{'PASS' if ok else 'FAIL'}] criterion {crit}: {summary}")
        for line in details:
            tr.write_line(f"         {line}")


@pytest.fixture
def acceptance_log():
    return ACCEPTANCE_LINES
