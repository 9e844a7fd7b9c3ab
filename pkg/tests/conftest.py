import pytest

from hybridmotion.simcore import DiscreteController, HybridSupervisor, paper_scenario, run_scenario
from hybridmotion.synthesis import PAPER_PID, RESHAPE_THRESHOLD, ReshapeSpec, make_experimental_soft

_ACCEPTANCE = {}


def _paper_run(with_object, soft_kind):
    scn = paper_scenario(with_object=with_object)
    stiff = DiscreteController.from_pid(PAPER_PID, scn.Ts)
    if soft_kind is None:
        return run_scenario(scn, stiff)
    spec = ReshapeSpec(sat_limit=RESHAPE_THRESHOLD)
    soft = DiscreteController.from_soft(make_experimental_soft(soft_kind, spec), scn.Ts)
    return run_scenario(scn, stiff, soft, HybridSupervisor(soft_kind=soft_kind))


@pytest.fixture(scope="session")
def paper_runs():
    """The four trapezoid runs, computed once per session (about 5 s each)."""
    cache = {}

    def get(name):
        if name not in cache:
            cache[name] = {
                "no_contact": lambda: _paper_run(False, "viscous"),
                "stiff": lambda: _paper_run(True, None),
                "viscous": lambda: _paper_run(True, "viscous"),
                "viscoelastic": lambda: _paper_run(True, "viscoelastic"),
            }[name]()
        return cache[name]

    return get


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if "test_acceptance.py" in report.nodeid and name.startswith("test_criterion_"):
        if report.when == "call" or report.outcome != "passed":
            prev = _ACCEPTANCE.get(name, "PASS")
            _ACCEPTANCE[name] = "FAIL" if (report.outcome != "passed" or prev == "FAIL") else "PASS"


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE, key=lambda n: int(n.split("_")[2])):
        terminalreporter.write_line(f"{_ACCEPTANCE[name]}  {name}")
