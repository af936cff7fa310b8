import pytest

# verdict lines collected by the acceptance suite, echoed after the run
VERDICTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if VERDICTS:
        terminalreporter.section("acceptance criteria")
        for line in sorted(VERDICTS):
            terminalreporter.write_line(line)


@pytest.fixture
def verdicts():
    return VERDICTS
