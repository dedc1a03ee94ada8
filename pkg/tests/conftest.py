import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent))

_ACCEPTANCE = {}


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    if "test_acceptance.py" not in report.nodeid:
        return
    name = report.nodeid.split("::")[-1]
    _ACCEPTANCE[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE:
        return
    groups = {}
    for name, outcome in _ACCEPTANCE.items():
        # test names look like test_c3_... ; the digit is the criterion number
        label = name.split("_")[1]
        groups.setdefault(label, []).append((name, outcome))
    terminalreporter.section("acceptance criteria")
    for label in sorted(groups):
        items = groups[label]
        verdict = "PASS" if all(o == "passed" for _, o in items) else "FAIL"
        detail = ", ".join(f"{n.split('_', 2)[2]}={o}" for n, o in items)
        terminalreporter.write_line(f"criterion {label[1:]}: {verdict}  ({detail})")
