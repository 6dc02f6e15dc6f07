import math
from pathlib import Path

import pytest

from smallcells import planar_model, standard_model
from smallcells.analytic import RatePair


MODEL_DIR = Path(__file__).resolve().parent / "data" / "models"


@pytest.fixture
def model_dir():
    return MODEL_DIR


@pytest.fixture
def standard_2d():
    return standard_model(2)


@pytest.fixture
def standard_3d():
    return standard_model(3)


@pytest.fixture
def sixty_degree_model():
    """
    gamma = 2, q = 0.3 with the second atom at 60 degrees from the first; edge rates are
    approximately (1.2124356, 0.5196152).
    """
    return planar_model(2.0, 0.3, math.pi / 3)


@pytest.fixture
def unequal_rates():
    return RatePair(gamma1=2.0, gamma2=1.0)
