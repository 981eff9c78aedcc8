"""
Общие сетки и поля для тестов
"""
import numpy as np
import pytest

from mtm.fields import Grid
from mtm.solitons import stationary_soliton

HALF_PI = np.pi / 2


@pytest.fixture(scope="module")
def grid():
    """Сетка по умолчанию: [-30, 30], 4096 узлов"""
    return Grid.symmetric(30.0, 4096)


@pytest.fixture(scope="module")
def small_grid():
    return Grid.symmetric(20.0, 1024)


@pytest.fixture(scope="module")
def soliton(grid):
    return stationary_soliton(HALF_PI, 0.0, 0.0, 0.0, grid)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
