import numpy as np
import pytest

from sphererc import _kernels
from sphererc.rng import RandomStream

CRITERIA = []


def pytest_terminal_summary(terminalreporter):
    if not CRITERIA:
        return
    terminalreporter.section("acceptance criteria")
    for line in CRITERIA:
        terminalreporter.write_line(line)


@pytest.fixture
def criterion():
    """Record a one-line PASS/FAIL verdict and assert it."""

    def record(label, ok, detail=""):
        CRITERIA.append(f"[{'PASS' if ok else 'FAIL'}] {label}: {detail}")
        assert ok, f"{label}: {detail}"

    return record


@pytest.fixture
def rng():
    return RandomStream(20170424)


@pytest.fixture(params=_kernels.BACKENDS)
def backend(request):
    with _kernels.use_backend(request.param):
        yield request.param
