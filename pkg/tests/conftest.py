import re

from hypothesis import settings

settings.register_profile("default", deadline=None)
settings.load_profile("default")

_criteria = {}


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)_(\w+)", report.nodeid)
    if not m:
        return
    if report.when != "call" and report.outcome == "passed":
        return
    names, ok = _criteria.get(int(m.group(1)), ([], True))
    name = m.group(2).replace("_", " ")
    if name not in names:
        names.append(name)
    _criteria[int(m.group(1))] = (names, ok and report.outcome == "passed")


def pytest_terminal_summary(terminalreporter):
    if not _criteria:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(_criteria):
        names, ok = _criteria[key]
        terminalreporter.write_line(f"criterion {key}: {'PASS' if ok else 'FAIL'}  {'; '.join(names)}")
