import random

import numpy as np
import pytest

from nhsym.numerics import DenseMatrix

_CRITERIA = {}


def pytest_configure(config):
    config.addinivalue_line("markers", "criterion(n, text): acceptance criterion")


def pytest_runtest_logreport(report):
    if report.when != "call" and not (report.when == "setup" and report.outcome != "passed"):
        return
    marker = getattr(report, "criterion", None)
    if marker:
        _CRITERIA[marker[0]] = (marker[1], report.outcome)


@pytest.hookimpl(hookwrapper=True)
def pytest_runtest_makereport(item, call):
    outcome = yield
    rep = outcome.get_result()
    m = item.get_closest_marker("criterion")
    if m:
        rep.criterion = m.args


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(_CRITERIA):
        text, outcome = _CRITERIA[n]
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"[{status}] criterion {n:>2}: {text}")


def random_matrix(rng, n, lo=-10.0, hi=10.0):
    return DenseMatrix(n, n, tuple(complex(rng.uniform(lo, hi), rng.uniform(lo, hi)) for _ in range(n * n)))


def to_np(m):
    return np.array(m.to_rows(), dtype=complex)


@pytest.fixture
def rng():
    return random.Random(20240611)
