import numpy as np
import pytest

from src.config.settings import DEFAULT_SEED
from src.conv.buffers import WorkBuffers
from src.tensor.tensor import RealTensor4


@pytest.fixture
def rng():
    return np.random.default_rng(DEFAULT_SEED)


@pytest.fixture
def buffers():
    return WorkBuffers()


@pytest.fixture
def make_tensor(rng):
    """Random unit-scale RealTensor4 of the given dims."""
    def _make(*dims):
        return RealTensor4(rng.standard_normal(dims))
    return _make
