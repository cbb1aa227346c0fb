import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qmpemba import linalg
from qmpemba.errors import (
    DegeneratePairing,
    DimensionMismatch,
    NegativeEigenvalue,
    NotHermitian,
)

from conftest import random_hermitian


def char_poly_coeffs(a):
    """Faddeev-LeVerrier recursion; independent of any eigenvalue routine."""
    n = a.shape[0]
    coeffs = [1.0 + 0j]
    m = np.zeros_like(a)
    for k in range(1, n + 1):
        m = a @ (m + coeffs[-1] * np.eye(n))
        coeffs.append(-np.trace(m) / k)
    return np.array(coeffs)


# --- herm_eig -----------------------------------------------------------------


def test_herm_eig_diagonal():
    res = linalg.herm_eig(np.diag([1.0, 2.0]))
    assert np.allclose(res.eigenvalues, [1.0, 2.0])
    assert np.allclose(res.eigenvectors, np.eye(2))


def test_herm_eig_pauli_x():
    res = linalg.herm_eig(np.array([[0, 1], [1, 0]], dtype=complex))
    assert np.allclose(res.eigenvalues, [-1.0, 1.0])


def test_herm_eig_root_oracle():
    rng = np.random.default_rng(7)
    a = random_hermitian(rng, 3)
    res = linalg.herm_eig(a)
    roots = np.sort(np.roots(char_poly_coeffs(a)).real)
    assert np.allclose(res.eigenvalues, roots, atol=1e-8)
    recon = (res.eigenvectors * res.eigenvalues) @ res.eigenvectors.conj().T
    assert np.linalg.norm(recon - a) <= 1e-10 * max(1.0, np.linalg.norm(a))


def test_herm_eig_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        linalg.herm_eig(np.array([[0, 1], [0, 0]], dtype=complex))


def test_herm_eig_reconstruction_sweep():
    rng = np.random.default_rng(42)
    for _ in range(1000):
        d = int(rng.integers(2, 10))
        a = random_hermitian(rng, d, scale=float(rng.uniform(0.1, 10)))
        w, v = linalg.herm_eig(a)
        recon = (v * w) @ v.conj().T
        scale = max(1.0, np.linalg.norm(a))
        assert np.linalg.norm(recon - a) <= 1e-10 * scale
        assert np.linalg.norm(v.conj().T @ v - np.eye(d)) <= 1e-10
        assert np.all(np.diff(w) >= 0)


# --- gen_eig ------------------------------------------------------------------


def test_gen_eig_diagonal():
    res = linalg.gen_eig(np.diag([0.0, -1.0, -2.0]))
    assert np.allclose(res.eigenvalues, [0.0, -1.0, -2.0])
    for i in range(3):
        assert abs(np.linalg.norm(res.right_vectors[:, i]) - 1.0) < 1e-12


def test_gen_eig_triangular():
    res = linalg.gen_eig(np.array([[0, 1], [0, -1]], dtype=complex))
    assert np.allclose(res.eigenvalues, [0.0, -1.0])


@pytest.mark.parametrize("d", [2, 3, 4])
def test_gen_eig_characteristic_polynomial_oracle(d):
    rng = np.random.default_rng(d)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    res = linalg.gen_eig(a)
    roots = np.roots(char_poly_coeffs(a))
    got = sorted(res.eigenvalues, key=lambda z: (z.real, z.imag))
    want = sorted(roots, key=lambda z: (z.real, z.imag))
    assert np.allclose(got, want, atol=1e-8)


def test_gen_eig_biorthonormal():
    rng = np.random.default_rng(11)
    a = rng.normal(size=(5, 5)) + 1j * rng.normal(size=(5, 5))
    res = linalg.gen_eig(a)
    gram = res.left_vectors.conj().T @ res.right_vectors
    assert np.linalg.norm(gram - np.eye(5)) < 1e-8
    # eigenvector/eigenvalue consistency
    for i in range(5):
        r = res.right_vectors[:, i]
        assert np.linalg.norm(a @ r - res.eigenvalues[i] * r) < 1e-10
        l = res.left_vectors[:, i]
        assert np.linalg.norm(l.conj() @ a - res.eigenvalues[i] * l.conj()) < 1e-8


def test_gen_eig_sorted_descending():
    rng = np.random.default_rng(3)
    a = rng.normal(size=(6, 6))
    res = linalg.gen_eig(a)
    assert np.all(np.diff(res.eigenvalues.real) <= 1e-12)


def test_gen_eig_defective_raises():
    with pytest.raises(DegeneratePairing) as err:
        linalg.gen_eig(np.array([[0, 1], [0, 0]], dtype=complex))
    assert err.value.condition is not None  # conditioning is reported


# --- func_on_support ----------------------------------------------------------


def test_sqrt_on_support():
    got = linalg.func_on_support(np.diag([4.0, 0.0, 1.0]), np.sqrt)
    assert np.allclose(got, np.diag([2.0, 0.0, 1.0]), atol=1e-12)


def test_log_of_identity_is_zero():
    got = linalg.func_on_support(np.eye(3, dtype=complex), np.log)
    assert np.allclose(got, 0.0, atol=1e-12)


def test_log_on_support_oracle():
    # range-projected log agrees with B ln(A + P_ker) computed independently
    rng = np.random.default_rng(5)
    g = rng.normal(size=(3, 2)) + 1j * rng.normal(size=(3, 2))
    a = g @ g.conj().T
    a /= np.trace(a).real
    got = linalg.func_on_support(a, np.log)
    w, v = np.linalg.eigh(a)
    mask = w > linalg.SUPPORT_CUTOFF
    p_ker = (v * (~mask)) @ v.conj().T
    b = (v * mask) @ v.conj().T
    import scipy.linalg as sla

    oracle = b @ sla.logm(a + p_ker)
    assert np.linalg.norm(got - oracle) < 1e-9


def test_identity_function_gives_range_projection():
    rng = np.random.default_rng(9)
    g = rng.normal(size=(4, 2)) + 1j * rng.normal(size=(4, 2))
    a = g @ g.conj().T
    got = linalg.func_on_support(a, lambda w: w)
    w, v = np.linalg.eigh(a)
    mask = w > linalg.SUPPORT_CUTOFF
    proj = (v * mask) @ v.conj().T
    assert np.linalg.norm(got - proj @ a @ proj) < 1e-10


def test_negative_eigenvalue_rejected():
    with pytest.raises(NegativeEigenvalue):
        linalg.func_on_support(np.diag([1.0, -1e-6]), np.sqrt)


# --- kron / vec / unvec / comm / acomm ----------------------------------------


def test_kron_identity():
    assert np.allclose(linalg.kron(np.eye(2), np.eye(2)), np.eye(4))


def test_comm_of_diagonals_vanishes():
    a, b = np.diag([1.0, 2.0]), np.diag([5.0, -3.0])
    assert np.allclose(linalg.comm(a, b), 0.0)


def test_acomm_symmetric():
    rng = np.random.default_rng(2)
    a = rng.normal(size=(3, 3))
    b = rng.normal(size=(3, 3))
    assert np.allclose(linalg.acomm(a, b), linalg.acomm(b, a))


def test_comm_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        linalg.comm(np.eye(2), np.eye(3))


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=5))
def test_vec_unvec_roundtrip(seed, d):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))
    assert np.array_equal(linalg.unvec(linalg.vec(a), d), a)


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1), st.integers(min_value=2, max_value=4))
def test_vectorization_convention(seed, d):
    # kron(A, B) @ vec(X) = vec(B X A^T): the column-stacking identity
    rng = np.random.default_rng(seed)
    a, b, x = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d)) for _ in range(3))
    lhs = linalg.kron(a, b) @ linalg.vec(x)
    rhs = linalg.vec(b @ x @ a.T)
    assert np.allclose(lhs, rhs, atol=1e-12)
