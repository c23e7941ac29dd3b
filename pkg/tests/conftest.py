"""Shared test plumbing: the acceptance summary block.

test_acceptance.py records one line per criterion here; the terminal
summary hook prints them after the run, outside pytest's output capture,
so the pass/fail ledger is visible even when every test passes.
"""

ACCEPTANCE_RESULTS: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(line)
