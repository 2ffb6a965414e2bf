import pytest

_CRITERIA: list[tuple[int, bool, str]] = []


@pytest.fixture
def criterion():
    """Record one acceptance line; returns the verdict so the test can assert on it."""

    def record(number: int, ok: bool, detail: str) -> bool:
        _CRITERIA.append((number, bool(ok), detail))
        return bool(ok)

    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number, ok, detail in sorted(_CRITERIA, key=lambda c: c[0]):
        terminalreporter.write_line(f"criterion {number}: {'PASS' if ok else 'FAIL'}  {detail}")
