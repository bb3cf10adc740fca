import pytest

from artifact.exact_engine import build_rank_table

_REPORT_KEY = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def table200():
    return build_rank_table(200)


@pytest.fixture(scope="session")
def table500():
    return build_rank_table(500)


@pytest.fixture(scope="session")
def acceptance_report(request):
    """List of (criterion, passed, detail) lines printed at the end of the run."""
    return request.config.stash.setdefault(_REPORT_KEY, [])


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(_REPORT_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for num, passed, detail in sorted(lines, key=lambda x: x[0]):
        terminalreporter.write_line(f"{'PASS' if passed else 'FAIL'} criterion {num}: {detail}")
