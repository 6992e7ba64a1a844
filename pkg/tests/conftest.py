import random
from fractions import Fraction

import pytest
from hypothesis import settings

from freelip.metric import line_space

settings.register_profile("default", max_examples=60, deadline=None)
settings.load_profile("default")


@pytest.fixture
def line3():
    return line_space([0, 1, 2])


@pytest.fixture
def line4():
    return line_space([0, 1, 2, 3])


@pytest.fixture
def rng():
    return random.Random(1234)


def frac(s):
    return Fraction(s)
