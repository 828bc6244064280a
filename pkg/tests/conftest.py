import numpy as np
import pytest

from utils.chain_functions import (
    ChainSpec,
    Christandl,
    KFamily,
    MlFamily,
    build_couplings,
    build_hamiltonian,
    reflection_permutation,
)
from utils.spectral_functions import diagonalize


def chain_model(n_sites, family=None, j0=1.0):
    """(hamiltonian, decomposition, reflection) of a built-in chain."""
    spec = ChainSpec(n_sites, j0, family or Christandl())
    h = build_hamiltonian(build_couplings(spec))
    return h, diagonalize(h), reflection_permutation(n_sites)


@pytest.fixture
def christandl4():
    return chain_model(4)


@pytest.fixture
def ml12_4():
    return chain_model(4, MlFamily(1, 2))


@pytest.fixture
def k4_4():
    return chain_model(4, KFamily(4))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def write_config(tmp_path):
    """Write a key = value scenario file and return its path."""
    def _write(text, name="scenario.cfg"):
        path = tmp_path / name
        path.write_text(text, encoding="utf-8")
        return path
    return _write
