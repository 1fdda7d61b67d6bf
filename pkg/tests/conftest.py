import random

import pytest

from contpay.fixtures import non_multi_base, three_choice_arena
from contpay.words import Alphabet


@pytest.fixture(scope="session")
def abc123():
    return Alphabet(("1", "2", "3"))


@pytest.fixture(scope="session")
def example_base():
    return non_multi_base()


@pytest.fixture(scope="session")
def choice_arena():
    return three_choice_arena()


@pytest.fixture()
def rng():
    return random.Random(20240811)
