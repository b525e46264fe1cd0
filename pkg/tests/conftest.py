import re

_CRITERIA = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+?)(\[.*\])?$", report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        key = int(m.group(1))
        name, ok = m.group(2), report.outcome == "passed"
        prev = _CRITERIA.get(key)
        # parametrized criteria pass only if every case passes
        _CRITERIA[key] = (name, ok and (prev is None or prev[1]),
                          (prev[2] if prev else []) + ([] if ok else [_reason(report)]))


def _reason(report):
    crash = getattr(report.longrepr, "reprcrash", None)
    return crash.message.splitlines()[0] if crash else str(report.longrepr)[:200]


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_CRITERIA):
        name, ok, reasons = _CRITERIA[key]
        line = f"{'PASS' if ok else 'FAIL'} criterion {key}: {name.replace('_', ' ')}"
        if reasons:
            line += f" ({reasons[0]})"
        terminalreporter.write_line(line)
