def pytest_terminal_summary(terminalreporter):
    try:
        import acceptance_suite
    except ImportError:
        return
    if not acceptance_suite.RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(acceptance_suite.RESULTS):
        terminalreporter.write_line(acceptance_suite.RESULTS[k].line())
