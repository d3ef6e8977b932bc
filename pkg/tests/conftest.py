import numpy as np
import pytest

from coopest import _pykernels

try:
    from coopest import _ckernels
    BACKENDS = [_pykernels, _ckernels]
except ImportError:
    BACKENDS = [_pykernels]


@pytest.fixture(params=BACKENDS, ids=lambda k: k.NAME)
def backend(request):
    return request.param


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_hermitian(rng, n, scale=1.0):
    g = rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))
    return scale * 0.5 * (g + g.conj().T)


def random_density(rng, n, rank=None):
    rank = rank or n
    g = rng.standard_normal((n, rank)) + 1j * rng.standard_normal((n, rank))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def random_tetra_point(rng):
    """(s_x, s_y, s_z) with pi/2 >= s_x >= s_y >= s_z >= 0."""
    return tuple(np.sort(rng.uniform(0, np.pi / 2, 3))[::-1])
