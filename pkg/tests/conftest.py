import pytest

CRITERIA: dict[int, str] = {}


def record(k: int, ok: bool, msg: str) -> None:
    line = f"{'PASS' if ok else 'FAIL'} criterion {k}: {msg}"
    CRITERIA[k] = line
    print(line)


@pytest.fixture
def criterion():
    return record


def pytest_terminal_summary(terminalreporter):
    if CRITERIA:
        terminalreporter.section("acceptance criteria")
        for k in sorted(CRITERIA):
            terminalreporter.write_line(CRITERIA[k])
