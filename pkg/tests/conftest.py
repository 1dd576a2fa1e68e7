import sys


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    # the acceptance module records one verdict line per criterion; echo
    # them here so they survive output capture even for passing tests
    for name, mod in sys.modules.items():
        if name.rsplit(".", 1)[-1] != "test_acceptance":
            continue
        lines = getattr(mod, "VERDICT_LINES", None)
        if lines:
            terminalreporter.section("acceptance verdicts")
            for line in lines:
                terminalreporter.write_line(line)
        break
