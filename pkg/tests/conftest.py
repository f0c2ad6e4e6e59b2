import numpy as np
import pytest

from treesmo.benchmarks import demo_dataset, get_demo
from treesmo.core import derive_stream, validate_dataset


@pytest.fixture
def sine5():
    return demo_dataset(get_demo("sine5"), derive_stream(0, 0))


@pytest.fixture
def small2d():
    gen = np.random.default_rng(3)
    X = gen.uniform(-1, 1, size=(40, 2))
    return validate_dataset(X, np.sin(3 * X[:, 0]) + X[:, 1] ** 2)


def pytest_terminal_summary(terminalreporter):
    from test_acceptance import RESULTS

    if not RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(RESULTS):
        ok, detail = RESULTS[n]
        terminalreporter.write_line(f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}")
