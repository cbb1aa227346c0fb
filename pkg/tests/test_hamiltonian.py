import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmpemba import (
    EffectiveParams,
    FourLevelParams,
    coupling_from_rates,
    effective_hamiltonian,
    full_hamiltonian,
    project,
)
from qmpemba.errors import NegativeProduct, SingularEpsilon
from qmpemba.hamiltonian import effective_params_from, system_block


def params(**kw):
    base = dict(omega1=1.0, omega2=0.06, omega1p=1.4, omega2p=0.04,
                detuning=0.0, gamma=1.0, epsilon=2.0)
    base.update(kw)
    return FourLevelParams(**base)


def test_full_hamiltonian_zero_couplings():
    p = params(omega1=1e-12, omega2=0.0, omega1p=0.0, omega2p=0.0, detuning=0.0)
    assert np.allclose(full_hamiltonian(p), 0.0, atol=1e-12)


def test_full_hamiltonian_decoupled_block():
    p = params(omega1p=0.0, omega2p=0.0, detuning=0.7)
    h = full_hamiltonian(p)
    assert np.allclose(h[:3, :3], system_block(p))
    assert np.allclose(h[3, :3], 0.0) and np.allclose(h[:3, 3], 0.0)
    assert h[3, 3] == 0.5 * 0.7


def test_full_hamiltonian_hermitian():
    h = full_hamiltonian(params(detuning=3.3))
    assert np.allclose(h, h.conj().T)


def test_project_no_coupling_returns_system_block():
    p = params(omega1p=0.0, omega2p=0.0)
    assert np.allclose(project(p), system_block(p))


def test_project_correction_is_rank_one():
    p = params()
    corr = system_block(p) - project(p)
    assert np.linalg.matrix_rank(corr, tol=1e-12) == 1


def test_project_singular_epsilon():
    with pytest.raises(SingularEpsilon):
        project(params(epsilon=0.0))


def test_projected_spectrum_approaches_full_spectrum():
    # with detuning 2*eps the elimination error on the retained levels is O(1/eps^2)
    errs = []
    for eps in (1e2, 1e4):
        p = params(epsilon=eps, detuning=2 * eps)
        full = np.linalg.eigvalsh(full_hamiltonian(p))
        reduced = np.linalg.eigvalsh(project(p))
        errs.append(np.abs(np.sort(full)[:3] - np.sort(reduced)).max())
    assert errs[1] < errs[0] * 1e-2


def test_projected_spectrum_tends_to_system_block():
    p_far = params(epsilon=1e6)
    gap = np.abs(
        np.linalg.eigvalsh(project(p_far)) - np.linalg.eigvalsh(system_block(p_far))
    ).max()
    p_near = params(epsilon=1e3)
    gap_near = np.abs(
        np.linalg.eigvalsh(project(p_near)) - np.linalg.eigvalsh(system_block(p_near))
    ).max()
    assert gap < gap_near * 1e-2  # O(1/eps) decay


def test_effective_hamiltonian_zero_pair():
    h = effective_hamiltonian(EffectiveParams(0.0, 0.0))
    want = 0.5 * np.array([[0, 1, 0.06], [1, 0, 0], [0.06, 0, 0]])
    assert np.allclose(h, want)


def test_effective_hamiltonian_case_study_entries():
    h = effective_hamiltonian(EffectiveParams(2.53, 0.026))
    assert np.allclose(np.diag(h).real, [0.0, -1.265, -0.013])
    assert abs(h[1, 2].real - (-np.sqrt(2.53 * 0.026) / 2)) < 1e-12
    assert abs(h[1, 2].real - (-0.128238)) < 5e-7
    assert np.allclose(h, h.conj().T)


@settings(max_examples=50, deadline=None)
@given(st.floats(0.0, 10.0), st.floats(0.0, 10.0))
def test_effective_hamiltonian_trace(w1, w2):
    h = effective_hamiltonian(EffectiveParams(w1, w2))
    assert abs(np.trace(h).real - (-(w1 + w2) / 2)) < 1e-12


def test_negative_product_rejected():
    with pytest.raises(NegativeProduct):
        EffectiveParams(1.0, -0.5)


def test_project_matches_effective_hamiltonian():
    p = params(omega1=1.0, omega2=0.06, omega1p=1.3, omega2p=0.05, epsilon=1.7)
    eff = effective_hamiltonian(effective_params_from(p))
    assert np.allclose(project(p), eff, atol=1e-12)


def test_coupling_from_rates_values():
    o1p, o2p = coupling_from_rates(1.0, 1.0)
    assert abs(o1p - np.sqrt(2.0)) < 1e-15
    assert abs(o2p - np.sqrt(0.0015)) < 1e-15


def test_coupling_from_rates_zero_and_scaling():
    assert coupling_from_rates(1.0, 1.0, a=0.0)[0] == 0.0
    o1, o2 = coupling_from_rates(1.0, 1.0)
    o1s, o2s = coupling_from_rates(1.0, 4.0)
    assert abs(o1s - 2 * o1) < 1e-15 and abs(o2s - 2 * o2) < 1e-15
