import pytest

from seqdfo.stochastics import RngStream

_ACCEPTANCE: dict = {}


@pytest.fixture
def stream():
    return RngStream(20240611)


def pytest_runtest_logreport(report):
    if "test_acceptance.py" not in report.nodeid:
        return
    if report.when == "call" or report.outcome != "passed":
        props = dict(report.user_properties)
        prev = _ACCEPTANCE.get(report.nodeid)
        if prev is None or prev[0] == "passed":
            _ACCEPTANCE[report.nodeid] = (report.outcome, props.get("summary", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for nodeid, (outcome, summary) in sorted(_ACCEPTANCE.items()):
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status} {nodeid.split('::')[-1]}: {summary}")
