import re

import pytest

from fovpoi.grid import warmup

_AC_RESULTS = {}
_AC_DETAILS = {}


@pytest.fixture(scope="session", autouse=True)
def _compiled_kernel():
    warmup()


@pytest.fixture
def ac_detail(request):
    """Attach a one-line measurement summary to the running acceptance test."""
    m = re.match(r"test_ac(\d\d)_", request.node.name)

    def record(text):
        print(text)
        _AC_DETAILS[int(m.group(1))] = text

    return record


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_ac(\d\d)_(\w+)", report.nodeid)
    if not m:
        return
    key = (int(m.group(1)), m.group(2))
    if report.when == "call" or report.outcome != "passed":
        prev = _AC_RESULTS.get(key)
        if prev is None or prev == "PASS":
            _AC_RESULTS[key] = "PASS" if report.outcome == "passed" else "FAIL"


def pytest_terminal_summary(terminalreporter):
    if not _AC_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for (n, name), status in sorted(_AC_RESULTS.items()):
        detail = _AC_DETAILS.get(n, "")
        terminalreporter.write_line(f"AC{n:02d} {status}  {name.replace('_', ' ')}"
                                    + (f"  [{detail}]" if detail else ""))
