import numpy as np
import pytest

import blockade as bl


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    raw = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    return 0.5 * (raw + raw.conj().T)


def random_density(space: bl.HilbertSpace, rng: np.random.Generator) -> bl.DensityMatrix:
    raw = rng.normal(size=(space.dim, space.dim)) + 1j * rng.normal(size=(space.dim, space.dim))
    mat = raw @ raw.conj().T
    return bl.DensityMatrix(space, mat / mat.trace().real)


@pytest.fixture
def rng():
    return np.random.default_rng(20240817)


@pytest.fixture(scope="session")
def small_space():
    return bl.make_space(2)


@pytest.fixture(scope="session")
def space4():
    return bl.make_space(4)
