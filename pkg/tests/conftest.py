def pytest_terminal_summary(terminalreporter):
    mod = None
    import sys

    for name, m in sys.modules.items():
        if name.endswith("test_acceptance") and hasattr(m, "summary_lines"):
            mod = m
            break
    if mod is None or not mod.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for line in mod.summary_lines():
        terminalreporter.write_line(line)
