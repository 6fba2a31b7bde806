import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from rhd2d.physics import EosParams


@pytest.fixture
def eos53():
    return EosParams(5.0 / 3.0)


@pytest.fixture
def rng():
    return np.random.default_rng(20260808)


def assert_close(actual, expected, rel=1e-13, abs_tol=0.0):
    actual = np.asarray(actual, dtype=float)
    expected = np.asarray(expected, dtype=float)
    np.testing.assert_allclose(actual, expected, rtol=rel, atol=abs_tol)
