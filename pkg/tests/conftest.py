import pytest

_CRITERIA = []


@pytest.fixture
def criterion(request):
    """Call with (ok, detail); records one PASS/FAIL line for the terminal summary."""
    name = request.node.name

    def record(ok, detail=""):
        line = f"[{'PASS' if ok else 'FAIL'}] {name}: {detail}"
        _CRITERIA.append(line)
        print(line)
        return ok

    return record


def pytest_terminal_summary(terminalreporter):
    if _CRITERIA:
        terminalreporter.section("acceptance criteria")
        for line in _CRITERIA:
            terminalreporter.write_line(line)
