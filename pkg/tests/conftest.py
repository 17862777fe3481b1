from __future__ import annotations

import numpy as np
import pytest

from pasearch import generate_continuous, generate_sequential


@pytest.fixture(scope="session")
def small_graph():
    return generate_sequential(200, 3, 11)


@pytest.fixture(scope="session")
def cont_pair():
    return generate_continuous(5000, 4, 7)


@pytest.fixture()
def rng():
    return np.random.default_rng(1234)
