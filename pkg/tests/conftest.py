"""Print one verdict line per acceptance criterion at the end of the run."""

_OUTCOMES: dict[str, bool] = {}


def pytest_collection_modifyitems(items):
    import pytest
    for item in items:
        if item.module.__name__.endswith("test_acceptance"):
            item.add_marker(pytest.mark.acceptance)


def pytest_runtest_logreport(report):
    if "test_acceptance.py::" not in report.nodeid:
        return
    name = report.nodeid.rsplit("::", 1)[-1]
    if report.when == "call" or (report.when == "setup" and not report.passed):
        _OUTCOMES[name] = report.passed


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    import test_acceptance as acc
    terminalreporter.section("acceptance criteria")
    for name in acc.CRITERIA:
        if name in _OUTCOMES:
            terminalreporter.write_line(acc.verdict_line(name, _OUTCOMES[name]))
