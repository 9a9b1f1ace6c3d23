"""Shared test plumbing: the acceptance-criterion result log.

Acceptance tests append one line per criterion; the terminal-summary
hook prints them after the run so they are visible despite output
capture.
"""

ACCEPTANCE_LOG: list[str] = []


def record_criterion(name: str, passed: bool, detail: str) -> None:
    status = "PASS" if passed else "FAIL"
    ACCEPTANCE_LOG.append(f"[{status}] {name}: {detail}")


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_LOG:
        return
    terminalreporter.section("acceptance criteria")
    for line in ACCEPTANCE_LOG:
        terminalreporter.write_line(line)
