import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from psdcurate.models import Dataset, Trajectory  # noqa: E402

ACCEPTANCE_LINES = []


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def make_dataset(arrays, labels=None, name="ds"):
    labels = labels or [None] * len(arrays)
    return Dataset(name, tuple(Trajectory(f"d{i}", a, label=lab) for i, (a, lab) in enumerate(zip(arrays, labels))))


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
