import pathlib

import pytest

from prefmcs.dsl import load

FIXTURES = pathlib.Path(__file__).resolve().parent.parent / "fixtures"
FIXTURE_NAMES = ("m0", "m1", "m2", "m3", "gadget")

_criteria = {}


def fixture_path(name):
    return FIXTURES / f"{name}.pmcs"


@pytest.fixture(scope="session")
def systems():
    return {name: load(fixture_path(name)) for name in FIXTURE_NAMES}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(number, title): acceptance criterion")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    mark = item.get_closest_marker("criterion")
    if mark is None:
        return
    number, title = mark.args
    if rep.when == "call" or (rep.when == "setup" and rep.failed):
        _criteria[number] = (title, "PASS" if rep.passed else "FAIL")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(_criteria):
        title, status = _criteria[number]
        terminalreporter.write_line(f"[{status}] criterion {number:>2}: {title}")
    passed = sum(1 for _, s in _criteria.values() if s == "PASS")
    terminalreporter.write_line(f"{passed}/{len(_criteria)} criteria passed")
