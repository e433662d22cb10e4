"""Shared fixtures and the acceptance-criteria report."""

# (criterion number, passed, detail) tuples appended by test_acceptance.py.
CRITERIA_RESULTS: list[tuple[int, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for number, passed, detail in sorted(CRITERIA_RESULTS):
        terminalreporter.write_line(
            f"criterion {number}: {'PASS' if passed else 'FAIL'} - {detail}")
