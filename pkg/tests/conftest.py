from pathlib import Path

import numpy as np
import pytest

from taxelsnn import TaxelLayout, load_layout, radial_layout

DATA_DIR = Path(__file__).resolve().parent.parent / "data"


@pytest.fixture(scope="session")
def layout39() -> TaxelLayout:
    return load_layout(DATA_DIR / "taxels39.txt")


@pytest.fixture(scope="session")
def layout10() -> TaxelLayout:
    # two rings of 4 + 6, no center: 10 taxels
    return radial_layout((4, 6), (2.0, 4.0), include_center=False)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
