_criterion_lines: list[str] = []


def pytest_runtest_logreport(report):
    if report.when != "call":
        return
    for name, content in report.sections:
        if "stdout" in name:
            _criterion_lines.extend(line for line in content.splitlines() if line.startswith("CRITERION "))


def pytest_terminal_summary(terminalreporter):
    if _criterion_lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(_criterion_lines, key=lambda s: int(s.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)
