"""Shared pytest wiring.

The terminal-summary hook prints one PASS/FAIL line per acceptance
criterion after the run, pulled from the outcomes of the numbered tests
in test_acceptance.py, so the gate is readable at a glance even when
everything passes.
"""

import re

_CRITERION = re.compile(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    outcomes = {}
    for status, ok in (("passed", True), ("failed", False), ("error", False)):
        for report in terminalreporter.stats.get(status, ()):
            match = _CRITERION.search(getattr(report, "nodeid", ""))
            if match:
                outcomes[int(match.group(1))] = (ok, match.group(2))
    if not outcomes:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for number in sorted(outcomes):
        ok, label = outcomes[number]
        verdict = "PASS" if ok else "FAIL"
        terminalreporter.write_line(
            f"criterion {number:2d} [{verdict}] {label.replace('_', ' ')}")
