import numpy as np
import pytest
import scipy.linalg as sla
from hypothesis import given, settings
from hypothesis import strategies as st

from qmpemba import (
    DensityOperator,
    covariance,
    entropy_context,
    expectation,
    from_pure,
    gibbs_state,
    hs_distance,
    maximally_mixed,
    populations,
    von_neumann_entropy,
    weighted_inner,
)
from qmpemba.errors import DimensionMismatch, ZeroVector
from qmpemba.initial_states import CATALOG_AMPLITUDES

from conftest import random_density_matrix, random_hermitian

TABLE_SME = CATALOG_AMPLITUDES["sme"]
TABLE_KET0 = CATALOG_AMPLITUDES["ket0"]


# --- construction ---------------------------------------------------------------


def test_from_pure_ground_state():
    rho = from_pure([1, 0, 0])
    assert np.allclose(rho.matrix, np.diag([1.0, 0, 0]))


def test_from_pure_sme_populations():
    rho = from_pure(TABLE_SME)
    amps = np.asarray(TABLE_SME)
    oracle = np.abs(amps) ** 2 / (np.abs(amps) ** 2).sum()
    assert np.allclose(populations(rho), oracle, atol=1e-14)
    # rounded catalog values
    assert np.allclose(populations(rho), (0.640, 0.111, 0.249), atol=2e-4)


def test_from_pure_renormalizes_ket0_row():
    rho = from_pure(TABLE_KET0)
    amps = np.asarray(TABLE_KET0)
    oracle = np.abs(amps) ** 2 / (np.abs(amps) ** 2).sum()
    assert np.allclose(populations(rho), oracle, atol=1e-14)
    assert np.allclose(populations(rho), (0.99902, 0.0000098, 0.00098), atol=1e-5)


def test_from_pure_zero_vector():
    with pytest.raises(ZeroVector):
        from_pure([0, 0, 0])


@settings(max_examples=100, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_from_pure_is_projector(seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=3) + 1j * rng.normal(size=3)
    if np.linalg.norm(amps) < 1e-6:
        amps = np.array([1.0, 0, 0])
    rho = from_pure(amps)
    m = rho.matrix
    assert np.linalg.norm(m @ m - m) < 1e-10
    assert abs(np.trace(m) - 1.0) < 1e-12


def test_density_operator_validation():
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.7, 0.7, -0.4]))  # trace 1 but not PSD
    with pytest.raises(ValueError):
        DensityOperator(np.diag([0.7, 0.7]))  # trace != 1
    with pytest.raises(ValueError):
        DensityOperator(np.array([[0.5, 0.5], [0.0, 0.5]]))  # not Hermitian


# --- entropy operator -----------------------------------------------------------


def test_entropy_of_pure_state_is_zero():
    rho = from_pure([0.6, 0.8j, 0.0])
    ctx = entropy_context(rho)
    assert abs(expectation(rho, ctx.entropy_operator)) < 1e-12


def test_entropy_of_maximally_mixed():
    rho = maximally_mixed(3)
    ctx = entropy_context(rho)
    assert abs(expectation(rho, ctx.entropy_operator) - np.log(3)) < 1e-12


def test_entropy_rank_two_uniform():
    rho = DensityOperator(np.diag([0.5, 0.5, 0.0]))
    ctx = entropy_context(rho)
    assert abs(expectation(rho, ctx.entropy_operator) - np.log(2)) < 1e-12
    assert np.allclose(ctx.support_projector, np.diag([1.0, 1.0, 0.0]), atol=1e-12)


def test_entropy_operator_two_forms_agree():
    # -B ln(rho) computed on the range vs -ln(rho + P_ker), on 1000 random states
    rng = np.random.default_rng(123)
    for _ in range(1000):
        d = 3
        rank = int(rng.integers(1, d + 1))
        m = random_density_matrix(rng, d, rank)
        ctx = entropy_context(m)
        w, v = np.linalg.eigh(m)
        p_ker = (v * (w <= 1e-12)) @ v.conj().T
        alt = -sla.logm(m + p_ker)
        assert np.linalg.norm(ctx.entropy_operator - alt) < 1e-9
        proj = ctx.support_projector
        assert np.linalg.norm(proj @ proj - proj) < 1e-10
        assert np.linalg.norm(proj - proj.conj().T) < 1e-10


@settings(max_examples=100, deadline=None)
@given(
    st.integers(min_value=0, max_value=2**32 - 1),
    st.integers(min_value=1, max_value=3),
)
def test_mean_entropy_bounds(seed, rank):
    rng = np.random.default_rng(seed)
    m = random_density_matrix(rng, 3, rank)
    s = von_neumann_entropy(m)
    assert -1e-12 <= s <= np.log(3) + 1e-12


# --- weighted inner product and covariance ---------------------------------------


def test_weighted_inner_identity():
    rng = np.random.default_rng(0)
    rho = random_density_matrix(rng, 3)
    assert abs(weighted_inner(rho, np.eye(3), np.eye(3)) - 1.0) < 1e-12


def test_weighted_inner_maximally_mixed():
    rng = np.random.default_rng(1)
    h = random_hermitian(rng, 3)
    got = weighted_inner(maximally_mixed(3), h, h)
    assert abs(got - np.trace(h @ h).real / 3) < 1e-12


def test_weighted_inner_brute_force_oracle():
    rng = np.random.default_rng(2)
    rho = random_density_matrix(rng, 3)
    f = random_hermitian(rng, 3)
    g = random_hermitian(rng, 3)
    oracle = 0.5 * np.trace(rho @ (f @ g + g @ f)).real
    assert abs(weighted_inner(rho, f, g) - oracle) < 1e-12
    assert abs(weighted_inner(rho, f, g) - weighted_inner(rho, g, f)) < 1e-12


def test_weighted_inner_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        weighted_inner(maximally_mixed(3), np.eye(2), np.eye(2))


def test_absolute_value_of_state_is_state():
    # |rho| = sqrt(rho^H rho) equals rho itself for PSD states
    rng = np.random.default_rng(3)
    m = random_density_matrix(rng, 3)
    assert np.linalg.norm(sla.sqrtm(m.conj().T @ m) - m) < 1e-10


def test_covariance_identity_vanishes():
    rng = np.random.default_rng(4)
    rho = random_density_matrix(rng, 3)
    h = random_hermitian(rng, 3)
    assert abs(covariance(rho, np.eye(3), h)) < 1e-12


def test_covariance_of_eigenstate_vanishes():
    rng = np.random.default_rng(5)
    h = random_hermitian(rng, 3)
    _, v = np.linalg.eigh(h)
    rho = from_pure(v[:, 0])
    assert abs(covariance(rho, h, h)) < 1e-12


def test_covariance_gibbs_identity(h_eff):
    # canonical states: Cov(H, S) = beta Var(H)
    beta = 1.0
    rho = gibbs_state(h_eff, beta)
    ctx = entropy_context(rho)
    s_hs = covariance(rho, h_eff, ctx.entropy_operator)
    s_hh = covariance(rho, h_eff, h_eff)
    assert abs(s_hs - beta * s_hh) < 1e-8


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_covariance_is_psd_quadratic_form(seed):
    rng = np.random.default_rng(seed)
    rho = random_density_matrix(rng, 3)
    a = random_hermitian(rng, 3)
    b = random_hermitian(rng, 3)
    gram = np.array(
        [
            [covariance(rho, a, a), covariance(rho, a, b)],
            [covariance(rho, b, a), covariance(rho, b, b)],
        ]
    )
    assert np.linalg.eigvalsh(gram).min() >= -1e-10
    # bilinearity spot check
    lhs = covariance(rho, a + 2 * b, b)
    rhs = covariance(rho, a, b) + 2 * covariance(rho, b, b)
    assert abs(lhs - rhs) < 1e-10


# --- populations and distance -----------------------------------------------------


def test_populations_diagonal():
    rho = DensityOperator(np.diag([0.5, 0.3, 0.2]))
    assert np.allclose(populations(rho), [0.5, 0.3, 0.2])
    assert np.allclose(populations(from_pure([1, 0, 0])), [1, 0, 0])


@settings(max_examples=50, deadline=None)
@given(st.integers(min_value=0, max_value=2**32 - 1))
def test_populations_sum_to_one(seed):
    rng = np.random.default_rng(seed)
    assert abs(populations(random_density_matrix(rng, 3)).sum() - 1.0) < 1e-9


def test_hs_distance_axioms():
    rng = np.random.default_rng(6)
    a = DensityOperator(random_density_matrix(rng, 3))
    b = DensityOperator(random_density_matrix(rng, 3))
    c = DensityOperator(random_density_matrix(rng, 3))
    assert hs_distance(a, a) == 0.0
    assert abs(hs_distance(a, b) - hs_distance(b, a)) < 1e-15
    assert hs_distance(a, c) <= hs_distance(a, b) + hs_distance(b, c) + 1e-12


def test_hs_distance_orthogonal_pures():
    d = hs_distance(from_pure([1, 0]), from_pure([0, 1]))
    assert abs(d - np.sqrt(2)) < 1e-12


def test_hs_distance_frobenius_oracle():
    a = from_pure(TABLE_KET0)
    b = from_pure(CATALOG_AMPLITUDES["ket2"])
    diff = a.matrix - b.matrix
    oracle = np.sqrt(np.trace(diff.conj().T @ diff).real)
    assert abs(hs_distance(a, b) - oracle) < 1e-12


def test_hs_distance_dimension_mismatch():
    with pytest.raises(DimensionMismatch):
        hs_distance(maximally_mixed(2), maximally_mixed(3))
