import pytest

# criterion number -> (title, outcome, seconds)
_ACCEPTANCE: dict[int, tuple[str, str, float]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, title): acceptance criterion n")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    report = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None or report.when != "call":
        return
    n, title = mark.args
    if hasattr(report, "wasxfail"):
        verdict = "FAIL (expected, analysis in the decisions ledger)"
    else:
        verdict = "PASS" if report.passed else "FAIL"
    _ACCEPTANCE[n] = (title, verdict, report.duration)


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_ACCEPTANCE):
        title, verdict, seconds = _ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {verdict:<4}  {title}  [{seconds:.2f} s]")
