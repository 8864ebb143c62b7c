ACCEPTANCE_FILE = "test_acceptance.py"


def pytest_terminal_summary(terminalreporter):
    rows = []
    for outcome in ("passed", "failed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            if ACCEPTANCE_FILE in getattr(rep, "nodeid", "") and rep.when == "call":
                rows.append((rep.nodeid.split("::", 1)[1], "PASS" if outcome == "passed" else "FAIL"))
    if not rows:
        return
    terminalreporter.section("acceptance criteria")
    for name, verdict in sorted(rows):
        terminalreporter.write_line(f"{verdict}  {name}")
