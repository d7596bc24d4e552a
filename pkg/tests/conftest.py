import numpy as np
import pytest

from gqmc.backend import available_backends


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(params=sorted(available_backends()))
def core(request):
    """Hot-kernel backend; parametrizes over python and (if built) compiled."""
    return available_backends()[request.param]
