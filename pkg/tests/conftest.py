import pytest

# (number, title) -> (passed, detail); filled by tests marked `criterion`
CRITERIA: dict[tuple[int, str], tuple[bool, str]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): one acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None or report.when != "call":
        return
    detail = dict(item.user_properties).get("detail", "")
    if report.failed and not detail:
        detail = str(call.excinfo.value).splitlines()[0] if call.excinfo else "failed"
    CRITERIA[tuple(marker.args)] = (report.passed, detail)


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for (number, title), (passed, detail) in sorted(CRITERIA.items()):
        status = "PASS" if passed else "FAIL"
        terminalreporter.write_line(f"criterion {number:>2}  {status}  {title}: {detail}")
