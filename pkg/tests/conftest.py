import numpy as np
import pytest

from ladders import SE3, SPD, Sphere


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


MANIFOLD_FACTORIES = {
    "sphere": Sphere,
    "spd": SPD,
    "se3_beta1": lambda: SE3(1.0),
    "se3_beta2": lambda: SE3(2.0),
}


@pytest.fixture(params=sorted(MANIFOLD_FACTORIES))
def any_manifold(request):
    return MANIFOLD_FACTORIES[request.param]()


@pytest.fixture(params=["sphere", "spd", "se3_beta1"])
def closed_manifold(request):
    return MANIFOLD_FACTORIES[request.param]()


# one PASS/FAIL line per acceptance criterion, printed after the run
_CRITERIA = {}


def pytest_runtest_logreport(report):
    crit = dict(report.user_properties).get("criterion")
    if crit is None:
        return
    if report.when == "call" or report.outcome != "passed":
        ok = report.outcome == "passed"
        _CRITERIA[crit] = _CRITERIA.get(crit, True) and ok


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for crit in sorted(_CRITERIA, key=lambda c: int(c.split(":")[0])):
        terminalreporter.write_line(f"{'PASS' if _CRITERIA[crit] else 'FAIL'} {crit}")
