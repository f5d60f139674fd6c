CRITERIA = {
    "test_criterion_1_spectrum": "1 spectrum",
    "test_criterion_2_eigenvector_residuals": "2 eigenvector residuals",
    "test_criterion_3_symmetries": "3 symmetries",
    "test_criterion_4_ipr_transition": "4 IPR transition",
    "test_criterion_5_dynamics": "5 dynamics",
    "test_criterion_6_oracle_equivalence": "6 oracle equivalence",
    "test_criterion_7_topology": "7 topology",
    "test_criterion_8_phase_diagram": "8 phase diagram",
}

_outcomes = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "acceptance: acceptance criteria gate")


def pytest_runtest_logreport(report):
    name = report.nodeid.split("::")[-1]
    if name not in CRITERIA:
        return
    if report.when == "call" or report.failed:
        if report.failed:
            _outcomes[name] = "FAIL"
        else:
            _outcomes.setdefault(name, "PASS")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for name, label in CRITERIA.items():
        if name in _outcomes:
            terminalreporter.write_line(f"{_outcomes[name]}  criterion {label}")
