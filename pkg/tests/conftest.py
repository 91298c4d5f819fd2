import numpy as np
import pytest
from scipy.linalg import expm

from transducer.symplectic import OMEGA4, dress, rotation, squeeze


def random_local(rng, squeezing=0.5):
    """Random single-mode symplectic matrix: rotation, squeeze, rotation."""
    return rotation(rng.uniform(0, 2 * np.pi)) @ squeeze(rng.normal(0, squeezing)) @ rotation(
        rng.uniform(0, 2 * np.pi)
    )


def random_rotation(rng):
    return rotation(rng.uniform(0, 2 * np.pi))


def random_dressing(rng, T, squeezing=0.5):
    return dress(T, *(random_local(rng, squeezing) for _ in range(4)))


def random_symplectic(rng, scale=0.6):
    """Generic 4x4 symplectic matrix ``expm(Omega H)`` with ``H`` symmetric."""
    A = rng.normal(0, scale, (4, 4))
    return expm(OMEGA4 @ (A + A.T) / 2)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)
