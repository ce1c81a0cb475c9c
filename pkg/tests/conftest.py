import re


def pytest_terminal_summary(terminalreporter):
    lines = []
    for outcome in ("passed", "failed", "xfailed", "error"):
        for rep in terminalreporter.stats.get(outcome, []):
            nodeid = getattr(rep, "nodeid", "")
            if "test_acceptance.py" not in nodeid or getattr(rep, "when", "call") != "call":
                continue
            m = re.search(r"test_criterion_(\d+)_(\w+)", nodeid)
            if m:
                verdict = "PASS" if outcome == "passed" else "FAIL"
                lines.append((int(m.group(1)), f"criterion {int(m.group(1)):2d} {verdict}  "
                                              f"{m.group(2).replace('_', ' ')}"))
    if lines:
        terminalreporter.section("acceptance criteria")
        for _, line in sorted(lines):
            terminalreporter.write_line(line)
