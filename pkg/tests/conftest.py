import os

import pytest
from hypothesis import HealthCheck, settings

from otic import Engine
from otic.fixtures import two_switch_facility

settings.register_profile("default", deadline=None,
                          suppress_health_check=[HealthCheck.too_slow])
settings.register_profile("ci", parent=settings.get_profile("default"), max_examples=300)
settings.load_profile(os.environ.get("HYPOTHESIS_PROFILE", "default"))


@pytest.fixture
def facility():
    return two_switch_facility()


@pytest.fixture
def engine():
    eng = Engine()
    eng.init_plan("10.77.0.0/16")
    return eng


# -- acceptance criteria report ------------------------------------------------

ACCEPTANCE: dict[str, tuple[bool, str]] = {}


@pytest.fixture
def criterion(request):
    """Record one acceptance line: ``criterion("AC1", detail)`` then assert."""
    name = request.node.get_closest_marker("criterion").args[0]
    state = {"detail": ""}

    def note(detail: str) -> None:
        state["detail"] = detail

    yield note
    rep = getattr(request.node, "rep_call", None)
    ok = bool(rep and rep.passed)
    ACCEPTANCE[name] = (ok, state["detail"])
    print(f"\n{name} {'PASS' if ok else 'FAIL'} {state['detail']}")


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    if rep.when == "call":
        item.rep_call = rep


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(name): acceptance criterion id")


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(ACCEPTANCE, key=lambda n: int(n[2:])):
        ok, detail = ACCEPTANCE[name]
        terminalreporter.write_line(f"{name} {'PASS' if ok else 'FAIL'}  {detail}")
