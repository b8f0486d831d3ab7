import pytest

_acceptance = {}


class AcceptanceLog:
    def __init__(self, key, title):
        self.key = key
        self.title = title
        self.detail = ""

    def note(self, detail):
        self.detail = detail


@pytest.fixture
def criterion(request):
    marker = request.node.get_closest_marker("criterion")
    key, title = marker.args
    entry = AcceptanceLog(key, title)
    _acceptance[request.node.nodeid] = entry
    return entry


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    entry = _acceptance.get(item.nodeid)
    if entry is not None and report.when == "call":
        entry.passed = report.passed


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(key, title): acceptance criterion")


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for entry in sorted(_acceptance.values(), key=lambda e: e.key):
        status = "PASS" if getattr(entry, "passed", False) else "FAIL"
        line = f"[{status}] {entry.key:<3} {entry.title}"
        if entry.detail:
            line += f"  ({entry.detail})"
        terminalreporter.write_line(line)
