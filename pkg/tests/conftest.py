"""Shared pytest plumbing: per-criterion verdict lines for the acceptance suite."""


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    verdicts = {}
    for outcome, label in (("passed", "PASS"), ("failed", "FAIL"), ("error", "FAIL")):
        for rep in terminalreporter.stats.get(outcome, []):
            if "test_acceptance" in rep.nodeid and getattr(rep, "when", "call") == "call":
                verdicts[rep.nodeid.split("::")[-1]] = label
    if not verdicts:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name in sorted(verdicts):
        terminalreporter.write_line(f"{name}: {verdicts[name]}")
