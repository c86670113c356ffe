import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from xnls.grid import Field2D, GridSpec

settings.register_profile(
    "suite",
    deadline=None,
    max_examples=25,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("suite")


def gaussian(grid, c=1.0, w=1.0):
    return Field2D.from_function(
        grid, lambda x, y: c * np.exp(-(x**2 + y**2) / w**2)
    )


@pytest.fixture
def grid64():
    return GridSpec(64, 20.0)


@pytest.fixture
def grid128():
    return GridSpec(128, 20.0)


@pytest.fixture
def grid128_tight():
    # h = 0.078: fine enough for the 1e-3 interpolation checks
    return GridSpec(128, 10.0)
