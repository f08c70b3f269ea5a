from acceptance_log import RESULTS


def pytest_terminal_summary(terminalreporter):
    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for cid, ok, detail in sorted(RESULTS, key=lambda r: r[0]):
        terminalreporter.write_line(f"ACCEPTANCE {cid:<22} {'PASS' if ok else 'FAIL'}  {detail}")
