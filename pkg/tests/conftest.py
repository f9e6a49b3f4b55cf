"""Collects the outcome of every ``@pytest.mark.criterion`` test for a summary block."""

import pytest

_OUTCOMES = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(label): acceptance criterion reported in the summary")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    marker = item.get_closest_marker("criterion")
    if marker is None:
        return
    label = marker.args[0]
    if report.when == "call" or report.failed:
        prev = _OUTCOMES.get(label, "PASS")
        _OUTCOMES[label] = "FAIL" if report.failed or prev == "FAIL" else "PASS"
        if report.when == "call" and report.skipped:
            _OUTCOMES[label] = "SKIP"


def pytest_terminal_summary(terminalreporter):
    if not _OUTCOMES:
        return
    terminalreporter.section("acceptance criteria")
    for label in sorted(_OUTCOMES):
        terminalreporter.write_line(f"{_OUTCOMES[label]} {label}")
