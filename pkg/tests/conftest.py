from _report import format_results


def pytest_terminal_summary(terminalreporter):
    lines = format_results()
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
