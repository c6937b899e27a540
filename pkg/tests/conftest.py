import pytest

from auctionlab import RuleMechanism, Valuation, greedy_rule

# item masks for the 4-item fixtures
A, B, C, D = 1, 2, 4, 8

_ACCEPTANCE_RESULTS = []


def record_acceptance(index: int, name: str, detail: str = "") -> None:
    """Called by the acceptance tests once their assertions have passed."""
    _ACCEPTANCE_RESULTS.append((index, name, "PASS", detail))


@pytest.fixture
def cycle_types():
    """Four bidders over items {a,b,c,d}: two have a strategic choice of set,
    two are single-minded; best-response play on the capped greedy mechanism
    cycles forever through four profiles."""
    return [
        Valuation([(A | B, 4), (D, 6)]),
        Valuation([(A, 2), (B | C, 5)]),
        Valuation([(C, 4)]),
        Valuation([(D, 5)]),
    ]


@pytest.fixture
def cycle_mechanism():
    return RuleMechanism(greedy_rule(2), 4)


def pytest_runtest_logreport(report):
    if report.when == "call" and report.failed and "test_acceptance.py" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        index = 99
        if name.startswith("test_c") and name[6:8].isdigit():
            index = int(name[6:8])
        _ACCEPTANCE_RESULTS.append((index, name, "FAIL", ""))


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for index, name, status, detail in sorted(_ACCEPTANCE_RESULTS):
        suffix = f"  ({detail})" if detail else ""
        terminalreporter.write_line(f"ACCEPTANCE {index:02d} {name}: {status}{suffix}")
