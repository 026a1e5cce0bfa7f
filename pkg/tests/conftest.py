import numpy as np
import pytest

import faultmem as fm

# Frozen certified-expander instances: (n, gamma, rho, seed, alpha, epsilon).
# All are girth-6 constructions; the (4,5) pair certifies pair expansion at
# delta = 3.48 and covers two-error patterns, the rest cover single errors.
CERTIFIED_INSTANCES = (
    (36, 3, 6, 7, 1.9 / 36, 0.25),
    (32, 3, 4, 11, 2.9 / 32, 1 / 12),
    (40, 4, 5, 13, 2.9 / 40, 0.12),
    (30, 4, 5, 17, 2.9 / 30, 0.12),
    (36, 3, 6, 101, 2.9 / 36, 1 / 12),
)


def build_instance(inst):
    n, gamma, rho, seed, alpha, eps = inst
    g = fm.build_random_regular(fm.CodeParams(n, gamma, rho), seed,
                                reject_4cycles=True)
    return g, fm.ExpansionProfile(alpha, gamma, eps)


@pytest.fixture(scope="session")
def certified_instances():
    return [build_instance(inst) for inst in CERTIFIED_INSTANCES]


@pytest.fixture(scope="session")
def seed7_graph():
    """The (12,3,6) seed-7 graph used across worked examples."""
    return fm.build_random_regular(fm.CodeParams(12, 3, 6), 7)


@pytest.fixture(scope="session")
def girth6_graph():
    """A girth-6 (36,3,6) graph: single errors correct in one round."""
    return fm.build_random_regular(fm.CodeParams(36, 3, 6), 7,
                                   reject_4cycles=True)


# one pass/fail line per acceptance criterion at the end of the run
_ACCEPTANCE_RESULTS = {}


def pytest_runtest_logreport(report):
    if "test_acceptance" in report.nodeid:
        name = report.nodeid.split("::")[-1]
        if report.when == "call":
            _ACCEPTANCE_RESULTS[name] = report.outcome
        elif report.when == "setup" and report.outcome != "passed":
            _ACCEPTANCE_RESULTS[name] = report.outcome


def pytest_terminal_summary(terminalreporter):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name in sorted(_ACCEPTANCE_RESULTS):
        outcome = _ACCEPTANCE_RESULTS[name]
        tag = "PASS" if outcome == "passed" else outcome.upper()
        terminalreporter.write_line(f"{tag}: {name}")
