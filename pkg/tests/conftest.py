import os

from hypothesis import HealthCheck, settings

settings.register_profile(
    "default", deadline=None, suppress_health_check=[HealthCheck.too_slow], derandomize=True
)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


# criterion number -> {test id: outcome}
_criteria: dict[int, dict[str, str | None]] = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n): acceptance criterion the test belongs to")


def pytest_collection_finish(session):
    for item in session.items:
        mark = item.get_closest_marker("criterion")
        if mark is not None:
            _criteria.setdefault(mark.args[0], {})[item.nodeid] = None


def pytest_runtest_logreport(report):
    for tests in _criteria.values():
        if report.nodeid in tests and tests[report.nodeid] != "failed":
            if report.when == "call" or report.outcome != "passed":
                tests[report.nodeid] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_criteria):
        tests = _criteria[n]
        ran = [o for o in tests.values() if o is not None]
        if not ran:
            continue
        failing = [nid.split("::")[-1] for nid, o in tests.items() if o not in ("passed", None)]
        verdict = "PASS" if not failing and len(ran) == len(tests) else "FAIL"
        extra = f"; failing: {', '.join(failing)}" if failing else ""
        terminalreporter.write_line(f"criterion {n}: {verdict} ({len(ran)}/{len(tests)} checks ran{extra})")
