import pytest

_KEY = pytest.StashKey[list]()


@pytest.fixture
def criterion(request):
    """Record one acceptance line; printed in the terminal summary."""
    lines = request.config.stash.setdefault(_KEY, [])

    def record(number, ok, detail):
        lines.append((number, ok, detail))

    return record


def pytest_terminal_summary(terminalreporter, config):
    lines = sorted(config.stash.get(_KEY, []))
    if lines:
        terminalreporter.section("acceptance criteria")
        for number, ok, detail in lines:
            terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
