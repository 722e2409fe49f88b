import re

import pytest

CRITERIA = {
    1: "genuine-copula suite (beta, checkerboard)",
    2: "beta equals Bernstein at degree n",
    3: "divisor criterion for Bernstein degrees",
    4: "non-asymptotic sup-distance bound",
    5: "Bernstein bias bounds",
    6: "counterexample regression",
    7: "simulation-study orderings",
    8: "Bernstein periodicity at n = 60",
    9: "LRE border pattern",
    10: "sampler scheme equivalence",
}

_outcomes: dict[int, str] = {}
_notes: dict[int, str] = {}


@pytest.fixture
def note(request):
    """Attach measured numbers to the criterion summary line."""
    m = re.search(r"test_criterion_(\d+)", request.node.name)

    def record(text: str) -> None:
        if m:
            _notes[int(m.group(1))] = text

    return record


def pytest_runtest_logreport(report):
    m = re.search(r"test_acceptance\.py::test_criterion_(\d+)", report.nodeid)
    if not m:
        return
    k = int(m.group(1))
    if report.failed:
        _outcomes[k] = "FAIL"
    elif report.when == "call" and report.passed:
        _outcomes.setdefault(k, "PASS")
    elif report.skipped:
        _outcomes.setdefault(k, "SKIP")


def pytest_terminal_summary(terminalreporter):
    if not _outcomes:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(CRITERIA):
        line = f"criterion {k:2d} {_outcomes.get(k, 'NOT RUN'):7s} {CRITERIA[k]}"
        if k in _notes:
            line += f" [{_notes[k]}]"
        terminalreporter.write_line(line)
