import copy

import pytest

from windgfm.config import DEFAULT_CONFIG, make_plant, make_surface
from windgfm.aero import CpSurface, TurbineParams


@pytest.fixture
def cfg():
    return copy.deepcopy(DEFAULT_CONFIG)


@pytest.fixture
def plant(cfg):
    return make_plant(cfg)


@pytest.fixture
def surface():
    return CpSurface()


@pytest.fixture
def turbine():
    return TurbineParams()


@pytest.fixture
def generic_surface():
    return CpSurface.generic()
