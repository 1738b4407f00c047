import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))

from chainscope import build_census, extend_far_field, preset


@pytest.fixture(scope="session")
def cubic_f():
    f, satellites = extend_far_field(preset("cubic_bistable"), 2.0, 0.25)
    return f


@pytest.fixture(scope="session")
def quadratic_f():
    f, satellites = extend_far_field(preset("quadratic_groundstate"), 2.0, 0.25)
    return f


@pytest.fixture(scope="session")
def cubic_census(cubic_f):
    return build_census(cubic_f)


@pytest.fixture(scope="session")
def quadratic_census(quadratic_f):
    return build_census(quadratic_f)
