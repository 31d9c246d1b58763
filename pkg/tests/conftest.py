import numpy as np
import pytest

from commevo import kernels


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture(params=kernels.available())
def kernel_impl(request):
    return kernels.get(request.param)


ACCEPTANCE_KEY = pytest.StashKey[list]()


def pytest_configure(config):
    config.stash[ACCEPTANCE_KEY] = []


@pytest.fixture
def report(request):
    """Record one PASS/FAIL line for an acceptance criterion."""
    lines = request.config.stash[ACCEPTANCE_KEY]

    def _report(number: int, ok: bool, detail: str) -> bool:
        lines.append((number, f"{'PASS' if ok else 'FAIL'} criterion {number:2d}: {detail}"))
        return ok

    return _report


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = config.stash.get(ACCEPTANCE_KEY, [])
    if not lines:
        return
    terminalreporter.section("acceptance criteria")
    for _, line in sorted(lines, key=lambda item: item[0]):
        terminalreporter.write_line(line)
