import pytest
from hypothesis import settings

from pgl.sieve import default_sieve

settings.register_profile("pgl", deadline=None, max_examples=60)
settings.load_profile("pgl")


@pytest.fixture(scope="session")
def sieve():
    return default_sieve()


_CRITERIA = {}


@pytest.fixture
def record():
    """Store one acceptance verdict line for the end-of-run summary."""

    def _record(number, ok, detail):
        _CRITERIA[number] = (ok, detail)
        print(f"criterion {number:2d}: {'PASS' if ok else 'FAIL'}  {detail}")

    return _record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        ok, detail = _CRITERIA[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
