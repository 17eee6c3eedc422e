"""Shared fixtures.

The D=4 basis set and its transfer matrix are the expensive objects
(building beta is ~400x400 complex plus an SVD), so they are session
scoped and shared across test modules.  Tests must not mutate them;
the arrays are flagged read-only at construction, which enforces that.
"""

import numpy as np
import pytest

from mubqpt import build_beta, generate_mub


@pytest.fixture(scope="session")
def set_d2():
    return generate_mub(2)


@pytest.fixture(scope="session")
def set_d3():
    return generate_mub(3)


@pytest.fixture(scope="session")
def set_d4():
    return generate_mub(4)


@pytest.fixture(scope="session")
def beta_d2(set_d2):
    return build_beta(set_d2)


@pytest.fixture(scope="session")
def beta_d4(set_d4):
    return build_beta(set_d4)


@pytest.fixture()
def rng():
    return np.random.default_rng(0xA5A5)
