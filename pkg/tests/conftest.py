import numpy as np
import pytest

from lvef._core import backends

BACKENDS = backends()


@pytest.fixture(params=sorted(BACKENDS))
def kernels(request):
    """Each available kernel backend in turn."""
    return BACKENDS[request.param]


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
