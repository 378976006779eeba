"""Shared pytest hooks: acceptance-criterion result reporting.

Acceptance tests register one (number, description, passed, detail) record
each; the terminal summary prints exactly one pass/fail line per criterion so
a full-suite log always contains the complete scorecard.
"""

ACCEPTANCE_RESULTS: dict[int, tuple[str, bool, str]] = {}


def record_criterion(number: int, description: str, passed: bool,
                     detail: str = ""):
    ACCEPTANCE_RESULTS[number] = (description, bool(passed), detail)


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(ACCEPTANCE_RESULTS):
        desc, ok, detail = ACCEPTANCE_RESULTS[num]
        line = f"[criterion {num:2d}] {'PASS' if ok else 'FAIL'} - {desc}"
        if detail:
            line += f" ({detail})"
        terminalreporter.write_line(line)
