import numpy as np
import pytest

from qmpemba import EffectiveParams, case_study_model, effective_hamiltonian, spectrum


def random_hermitian(rng, d, scale=1.0):
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    return scale * 0.5 * (a + a.conj().T)


def random_density_matrix(rng, d, rank=None):
    """Random state of the given rank via a Ginibre-style factor."""
    r = rank or d
    g = rng.normal(size=(d, r)) + 1j * rng.normal(size=(d, r))
    m = g @ g.conj().T
    return m / np.trace(m).real


@pytest.fixture(scope="session")
def case_model():
    return case_study_model()


@pytest.fixture(scope="session")
def case_spectrum(case_model):
    return spectrum(case_model)


@pytest.fixture(scope="session")
def h_eff():
    return effective_hamiltonian(EffectiveParams(2.53, 0.026))
