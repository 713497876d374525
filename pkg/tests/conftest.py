"""Per-criterion pass/fail summary for the acceptance suite."""

_LABELS = {}
_FAILED = set()


def pytest_collection_modifyitems(items):
    for item in items:
        marker = item.get_closest_marker("criterion")
        if marker is not None:
            number, title = marker.args
            _LABELS[item.nodeid] = (number, title)


def pytest_runtest_logreport(report):
    if report.nodeid in _LABELS and report.failed:
        _FAILED.add(_LABELS[report.nodeid])


def pytest_terminal_summary(terminalreporter):
    criteria = sorted(dict.fromkeys(_LABELS.values()), key=lambda c: c[0])
    if not criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number, title in criteria:
        status = "FAIL" if (number, title) in _FAILED else "PASS"
        terminalreporter.write_line(f"criterion {number:>2} {status}  {title}")
