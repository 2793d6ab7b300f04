from pathlib import Path

import pytest

FIXTURES = Path(__file__).resolve().parents[1] / "src" / "incverify" / "fixtures"


@pytest.fixture
def fixtures() -> Path:
    return FIXTURES


@pytest.fixture
def v1_source() -> str:
    return (FIXTURES / "v1.mini").read_text()


@pytest.fixture
def v2_source() -> str:
    return (FIXTURES / "v2.mini").read_text()


# one line per acceptance criterion, printed after the run
CRITERIA: dict[int, str] = {}


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(CRITERIA):
        terminalreporter.write_line(CRITERIA[number])
