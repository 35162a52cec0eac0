import os

import pytest
from hypothesis import HealthCheck, settings

settings.register_profile("default", deadline=None, max_examples=60,
                          suppress_health_check=[HealthCheck.too_slow])
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


def pytest_addoption(parser):
    parser.addoption("--extended", action="store_true", default=False,
                     help="run the long-running reproductions")


def pytest_collection_modifyitems(config, items):
    if config.getoption("--extended") or os.environ.get("LONOGO_EXTENDED") == "1":
        return
    skip = pytest.mark.skip(reason="long-running; use --extended or LONOGO_EXTENDED=1")
    for item in items:
        if "extended" in item.keywords:
            item.add_marker(skip)



# acceptance criteria report one line each at the end of the run
ACCEPTANCE_LINES: dict[str, str] = {}


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("acceptance")
    if mark is None:
        return
    key, description = mark.args
    if rep.when == "setup" and rep.skipped:
        ACCEPTANCE_LINES[key] = f"SKIP criterion {key}: {description} (needs --extended)"
    elif rep.when == "call":
        status = "PASS" if rep.passed else "FAIL"
        ACCEPTANCE_LINES[key] = f"{status} criterion {key}: {description} ({rep.duration:.1f}s)"


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_LINES:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(ACCEPTANCE_LINES, key=lambda k: [int(p) if p.isdigit() else p for p in k.split(".")]):
        terminalreporter.write_line(ACCEPTANCE_LINES[key])
