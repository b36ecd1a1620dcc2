import re

_CRITERION = re.compile(r"test_criterion_(\d+)")
_results: dict[int, list[tuple[str, str]]] = {}


def pytest_runtest_logreport(report):
    m = _CRITERION.search(report.nodeid)
    if not m:
        return
    if report.when == "call" or (report.when == "setup" and report.outcome != "passed"):
        detail = dict(report.user_properties).get("measured", "")
        _results.setdefault(int(m.group(1)), []).append((report.outcome, detail))


def pytest_terminal_summary(terminalreporter):
    if not _results:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_results):
        outcomes = _results[n]
        verdict = "PASS" if all(o == "passed" for o, _ in outcomes) else "FAIL"
        details = "; ".join(d for _, d in outcomes if d)
        terminalreporter.write_line(f"criterion {n}: {verdict}" + (f"  ({details})" if details else ""))
