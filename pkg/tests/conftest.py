from __future__ import annotations

import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture
def gray_image(rng):
    return rng.random((48, 56))


@pytest.fixture
def rgb_image(rng):
    return rng.random((40, 44, 3))
