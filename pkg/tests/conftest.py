import os

import pytest

# tests pass cache directories explicitly; never touch a user-configured cache
os.environ["WEYL_LAB_CACHE"] = ""

_ACCEPTANCE = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance(index, title): headline acceptance check")
    config.addinivalue_line("markers", "slow: takes more than a few seconds")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    mark = dict(report.user_properties).get("acceptance")
    if mark is not None:
        prev = _ACCEPTANCE.get(mark[0], (mark[1], True))[1]
        _ACCEPTANCE[mark[0]] = (mark[1], prev and report.outcome == "passed")


@pytest.fixture(autouse=True)
def _tag_acceptance(request):
    m = request.node.get_closest_marker("acceptance")
    if m is not None:
        request.node.user_properties.append(("acceptance", m.args))
    yield


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for idx in sorted(_ACCEPTANCE):
        title, ok = _ACCEPTANCE[idx]
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'} {idx:2d} {title}")
