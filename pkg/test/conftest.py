import random

import numpy
import pytest


@pytest.fixture
def rng():
    """Fix random number generation"""
    random.seed(0)
    numpy.random.seed(0)
    return numpy.random.default_rng(0)
