import numpy as np
import pytest

_CRITERIA = []


@pytest.fixture
def criterion():
    """Record a one-line pass/fail verdict for the acceptance summary."""
    def record(label, passed, detail=""):
        _CRITERIA.append((label, bool(passed), detail))
        return passed
    return record


def pytest_terminal_summary(terminalreporter):
    if not _CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for label, passed, detail in _CRITERIA:
        terminalreporter.write_line(f"[{'PASS' if passed else 'FAIL'}] {label}: {detail}")


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def random_unit_matrix(rng, m, n):
    A = rng.standard_normal((m, n))
    return A / np.linalg.norm(A, axis=0)
