from pathlib import Path

import numpy as np
import pytest

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture
def truck_path():
    return FIXTURES / "truck_defects.csv"


@pytest.fixture
def lake_path():
    return FIXTURES / "lake_huron.csv"


@pytest.fixture
def rng():
    return np.random.default_rng(20260826)
