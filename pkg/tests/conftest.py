import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

ACCEPTANCE_RESULTS: list[tuple[str, bool, str]] = []


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE_RESULTS:
        return
    terminalreporter.section("acceptance criteria")
    for name, ok, detail in ACCEPTANCE_RESULTS:
        terminalreporter.write_line(f"{'PASS' if ok else 'FAIL'}  {name}: {detail}")


def random_rr(rng, n_min=40, n_max=120, lo=300.0, hi=1400.0):
    n = int(rng.integers(n_min, n_max + 1))
    return rng.uniform(lo, hi, size=n)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
