"""Shared test plumbing: the acceptance-criteria summary block."""

_acceptance_lines = []


def acceptance_line(text: str) -> None:
    _acceptance_lines.append(text)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _acceptance_lines:
        return
    terminalreporter.section("acceptance criteria")
    for line in _acceptance_lines:
        terminalreporter.write_line(line)
