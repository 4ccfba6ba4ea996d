import pytest

from toricq import FIXTURES, load_fixture

ACCEPTANCE_LINES: list[str] = []


@pytest.fixture(scope="session")
def models():
    return {name: load_fixture(name) for name in FIXTURES}


@pytest.fixture(scope="session")
def cp1(models):
    return models["cp1"]


@pytest.fixture(scope="session")
def cp2(models):
    return models["cp2"]


@pytest.fixture(scope="session")
def blowup(models):
    return models["blowup"]


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture
def verdict():
    """Record one PASS/FAIL line for an acceptance criterion and return the verdict."""

    def record(number, title, ok, detail, elapsed, limit):
        ok = bool(ok) and elapsed < limit
        line = f"criterion {number:>2}  {'PASS' if ok else 'FAIL'}  {title}: {detail} [{elapsed:.2f}s, limit {limit}s]"
        ACCEPTANCE_LINES.append(line)
        print(line)
        return ok

    return record
