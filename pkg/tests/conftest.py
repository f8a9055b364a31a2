"""Collects one pass/fail line per acceptance criterion and prints them after the run."""

import re

_ACCEPTANCE: dict[str, tuple[str, str]] = {}
_NAME = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_runtest_logreport(report):
    m = _NAME.search(report.nodeid)
    if not m:
        return
    key = f"{int(m.group(1)):02d} {m.group(2).replace('_', ' ')}"
    if report.when == "call" or report.outcome != "passed":
        detail = "; ".join(str(v) for k, v in report.user_properties if k == "measured")
        outcome = "PASS" if report.passed else "FAIL"
        if key not in _ACCEPTANCE or outcome == "FAIL":
            _ACCEPTANCE[key] = (outcome, detail)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_ACCEPTANCE):
        outcome, detail = _ACCEPTANCE[key]
        terminalreporter.write_line(f"criterion {key}: {outcome}" + (f"  [{detail}]" if detail else ""))
