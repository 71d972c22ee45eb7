import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", max_examples=40, deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("thorough", max_examples=300, deadline=None)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))

_CRITERIA = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.failed):
        return
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        num = int(name.split("_")[2])
        ok = report.passed
        prev = _CRITERIA.get(num, True)
        _CRITERIA[num] = prev and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for num in sorted(_CRITERIA):
        terminalreporter.write_line(
            f"criterion {num:2d}: {'PASS' if _CRITERIA[num] else 'FAIL'}")


@pytest.fixture(scope="session")
def corpus_reports(tmp_path_factory):
    """Every shipped scenario run once; {name: report dict}."""
    from islab import report as rpt
    from islab.scenario import list_shipped, load, shipped_path

    out = {}
    for name in list_shipped():
        out[name] = rpt.run_scenario(load(shipped_path(name)))
    return out
