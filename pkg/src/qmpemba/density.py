"""Density-operator semantics: validation, entropy operator, weighted covariances.

Units are dimensionless throughout (k_B = 1, hbar = 1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import linalg
from .errors import DimensionMismatch, ZeroVector
from .linalg import SUPPORT_CUTOFF, as_matrix

HERMITICITY_TOL = 1e-9
TRACE_TOL = 1e-9
PSD_TOL = -1e-9


@dataclass(frozen=True)
class DensityOperator:
    """Validated quantum state: Hermitian, unit trace, positive semidefinite."""

    matrix: np.ndarray

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise DimensionMismatch(f"density operator must be square, got {m.shape}")
        dev = np.linalg.norm(m - m.conj().T)
        if dev > HERMITICITY_TOL * max(1.0, np.linalg.norm(m)):
            raise ValueError(f"density operator not Hermitian: deviation {dev:.3e}")
        tr = np.trace(m)
        if abs(tr - 1.0) > TRACE_TOL:
            raise ValueError(f"density operator trace {tr:.12g} != 1")
        m = 0.5 * (m + m.conj().T)
        wmin = np.linalg.eigvalsh(m).min()
        if wmin < PSD_TOL:
            raise ValueError(f"density operator has eigenvalue {wmin:.3e} < {PSD_TOL:g}")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class EntropyContext:
    """Support projector, range-restricted log, and the entropy operator of a state."""

    support_projector: np.ndarray
    log_rho_on_support: np.ndarray
    entropy_operator: np.ndarray


def clean_state(matrix, *, fail_below: float = -1e-6) -> DensityOperator:
    """Hermitize, repair roundoff-scale negative eigenvalues, renormalize trace.

    Used at integrator output boundaries.  Eigenvalues below ``fail_below``
    cannot be blamed on roundoff and raise instead of being hidden.
    """
    m = linalg.hermitize(matrix)
    w = np.linalg.eigvalsh(m)
    wmin = float(w.min())
    if wmin < fail_below:
        from .errors import PositivityLoss

        raise PositivityLoss(f"state eigenvalue {wmin:.3e} below {fail_below:g}")
    if wmin < -1e-10:
        w, v = np.linalg.eigh(m)
        m = (v * np.clip(w, 0.0, None)) @ v.conj().T
    m = m / np.trace(m).real
    return DensityOperator(m)


def from_pure(amplitudes) -> DensityOperator:
    """Rank-1 projector |psi><psi| from (renormalized) amplitudes."""
    a = np.asarray(amplitudes, dtype=complex).reshape(-1)
    norm = np.linalg.norm(a)
    if norm < 1e-300:
        raise ZeroVector("from_pure: amplitudes are all zero")
    a = a / norm
    return DensityOperator(np.outer(a, a.conj()))


def maximally_mixed(dim: int) -> DensityOperator:
    return DensityOperator(np.eye(dim, dtype=complex) / dim)


def entropy_context(rho) -> EntropyContext:
    """Entropy operator S = -B ln(rho) with B the projector onto the range."""
    m = as_matrix(rho)
    projector = linalg.support_projector(m)
    log_supp = linalg.func_on_support(m, np.log)
    return EntropyContext(projector, log_supp, -log_supp)


def expectation(rho, op) -> float:
    """<F> = Tr(rho F) for Hermitian F (real part returned)."""
    return float(np.einsum("ij,ji->", as_matrix(rho), as_matrix(op)).real)


def weighted_inner(rho, f, g) -> float:
    """State-weighted symmetric product (F, G) = Tr(rho {F, G}) / 2.

    For the PSD states handled here |rho| = rho, so the weight is the state
    itself (the sqrt(rho^H rho) form is exercised only in validation tests).
    """
    m, fm, gm = as_matrix(rho), as_matrix(f), as_matrix(g)
    if not (m.shape == fm.shape == gm.shape):
        raise DimensionMismatch(
            f"weighted_inner: shapes {m.shape}, {fm.shape}, {gm.shape} differ"
        )
    return float(0.5 * np.einsum("ij,jk,ki->", m, fm, gm).real
                 + 0.5 * np.einsum("ij,jk,ki->", m, gm, fm).real)


def covariance(rho, f, g) -> float:
    """Cov(F, G) = (F, G) - <F><G> under the state-weighted product."""
    return weighted_inner(rho, f, g) - expectation(rho, f) * expectation(rho, g)


def von_neumann_entropy(rho) -> float:
    """<S> = -Tr(rho ln rho) on the support of rho."""
    w = np.linalg.eigvalsh(as_matrix(rho))
    w = w[w > SUPPORT_CUTOFF]
    return float(-(w * np.log(w)).sum())


def populations(rho) -> np.ndarray:
    """Diagonal occupations Tr(rho |i><i|)."""
    return np.diag(as_matrix(rho)).real.copy()


def hs_distance(a, b) -> float:
    """Hilbert-Schmidt (Frobenius) distance between two states."""
    ma, mb = as_matrix(a), as_matrix(b)
    if ma.shape != mb.shape:
        raise DimensionMismatch(f"hs_distance: shapes {ma.shape} and {mb.shape} differ")
    return float(np.linalg.norm(ma - mb))
