import os
import sys

sys.path.insert(0, os.path.dirname(__file__))

# (criterion label, passed, detail) appended by the acceptance suite
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in ACCEPTANCE_LINES:
        terminalreporter.write_line(f"{label}: {'PASS' if passed else 'FAIL'} ({detail})")
