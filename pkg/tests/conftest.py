import numpy as np
import pytest

from kerrtda import _backend


def available_backends():
    names = ["python"]
    try:
        _backend.load("compiled")
        names.insert(0, "compiled")
    except ImportError:
        pass
    return names


@pytest.fixture(params=available_backends())
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def pytest_terminal_summary(terminalreporter):
    import sys
    module = sys.modules.get("test_acceptance")
    if module is not None and module.RESULTS:
        terminalreporter.section("acceptance criteria")
        for line in module.RESULTS:
            terminalreporter.write_line(line)
