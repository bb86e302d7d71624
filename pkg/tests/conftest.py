import pytest

_RESULTS = pytest.StashKey()


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion covered by a test")
    config.stash[_RESULTS] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    results = item.config.stash[_RESULTS]
    prev = results.get(number)
    failed = report.failed or (prev is not None and prev[1] == "FAIL")
    duration = (prev[2] if prev else 0.0) + (report.duration if report.when == "call" else 0.0)
    detail = dict(item.user_properties).get("detail", prev[3] if prev else "")
    results[number] = (title, "FAIL" if failed else "PASS", duration, detail)


def pytest_terminal_summary(terminalreporter, config):
    results = config.stash.get(_RESULTS, {})
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        title, status, duration, detail = results[number]
        terminalreporter.write_line("criterion %2d  %s  %-55s %6.2fs  %s" % (number, status, title, duration, detail))
