import numpy as np
import pytest

from torusdamp.scene_geometry import preset_scene


@pytest.fixture(scope="session")
def fig4_1():
    return preset_scene("fig4_1:1/10,1/10,1/10,1/10")


@pytest.fixture(scope="session")
def fig5_1():
    return preset_scene("fig5_1")


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
