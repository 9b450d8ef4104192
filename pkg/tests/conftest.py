_acceptance = {}


def pytest_runtest_makereport(item, call):
    info = getattr(getattr(item, "function", None), "acceptance", None)
    if info is None:
        return
    if call.when == "call" or (call.when == "setup" and call.excinfo is not None):
        _acceptance[info] = call.excinfo is None


def pytest_terminal_summary(terminalreporter):
    if not _acceptance:
        return
    terminalreporter.section("acceptance criteria")
    for (n, title), ok in sorted(_acceptance.items()):
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {title}")
