"""Pytest hooks: print one summary line per acceptance criterion."""

_outcomes = {}


def pytest_runtest_logreport(report):
    name = report.nodeid.rsplit("::", 1)[-1]
    if not name.startswith("test_criterion_"):
        return
    if report.when == "call" or (report.when == "setup" and report.skipped):
        _outcomes[name] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _outcomes:
        return
    labels = {"passed": "PASS", "failed": "FAIL", "skipped": "SKIP"}
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(_outcomes):
        outcome = labels.get(_outcomes[name], _outcomes[name].upper())
        terminalreporter.write_line(f"{name}: {outcome}")
