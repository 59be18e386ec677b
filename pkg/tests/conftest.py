"""Shared test plumbing: collect acceptance checklist lines and echo them
in the terminal summary, where pytest's output capture cannot swallow them.
"""

acceptance_lines = []


def pytest_terminal_summary(terminalreporter):
    if acceptance_lines:
        terminalreporter.section("acceptance criteria")
        for line in acceptance_lines:
            terminalreporter.line(line)
