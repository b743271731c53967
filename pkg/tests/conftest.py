import pytest
from hypothesis import settings

settings.register_profile("suite", max_examples=200, deadline=None, derandomize=True)
settings.load_profile("suite")

_criteria: dict[int, tuple[str, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion covered by the test")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    n, title = mark.args
    failed = report.failed or (report.when == "call" and report.skipped)
    if failed or (report.when == "call" and n not in _criteria):
        _criteria[n] = (title, "FAIL" if failed else "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        title, verdict = _criteria[n]
        terminalreporter.write_line(f"criterion {n} [{verdict}] {title}")
