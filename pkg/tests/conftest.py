import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from livsic_germs.dynamics import FullShift, ToralAutomorphism


@pytest.fixture
def rng():
    return np.random.default_rng(20240917)


@pytest.fixture(scope="session")
def shift():
    return FullShift(2)


@pytest.fixture(scope="session")
def cat():
    return ToralAutomorphism(((2, 1), (1, 1)))
