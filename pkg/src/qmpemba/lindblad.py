"""Markovian master-equation dynamics of the driven three-level system.

The generator is assembled both as a superoperator matrix (for spectral
analysis and eigenmode propagation) and as a direct right-hand side (for the
independent fixed-step integration route).  The slowest decaying eigenmode
supplies the anomalous-relaxation overlap diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import linalg
from .density import DensityOperator, clean_state
from .errors import DimensionMismatch
from .integrators import rk4_fixed
from .linalg import as_matrix, gen_eig, kron, unvec, vec

# Case-study defaults (dimensionless, ground-state Rabi rate = 1).  kappa2 is
# a derived default inferred from the weak-channel coupling ratio; override
# through the model constructor where needed.
DEFAULT_OMEGA1 = 1.0
DEFAULT_OMEGA2 = 0.06
DEFAULT_KAPPA1 = 2.0
DEFAULT_KAPPA2 = 0.0015


@dataclass(frozen=True)
class LindbladModel:
    hamiltonian: np.ndarray
    jumps: tuple = ()
    kappa1: float = 0.0
    kappa2: float = 0.0

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if np.linalg.norm(h - h.conj().T) > 1e-9 * max(1.0, np.linalg.norm(h)):
            raise ValueError("LindbladModel: Hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "jumps", tuple(as_matrix(j) for j in self.jumps))

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


def case_study_model(
    omega1: float = DEFAULT_OMEGA1,
    omega2: float = DEFAULT_OMEGA2,
    kappa1: float = DEFAULT_KAPPA1,
    kappa2: float = DEFAULT_KAPPA2,
) -> LindbladModel:
    """Three-level model with decay from |1> and |2> into the ground state."""
    h = 0.5 * np.array(
        [[0, omega1, omega2], [omega1, 0, 0], [omega2, 0, 0]], dtype=complex
    )
    j1 = np.zeros((3, 3), dtype=complex)
    j1[0, 1] = np.sqrt(kappa1)
    j2 = np.zeros((3, 3), dtype=complex)
    j2[0, 2] = np.sqrt(kappa2)
    return LindbladModel(h, (j1, j2), kappa1, kappa2)


def lindblad_rhs(model: LindbladModel, rho) -> np.ndarray:
    """Direct action of the generator on a matrix (no vectorization)."""
    m = as_matrix(rho)
    h = model.hamiltonian
    out = -1j * (h @ m - m @ h)
    for j in model.jumps:
        jdj = j.conj().T @ j
        out += j @ m @ j.conj().T - 0.5 * (jdj @ m + m @ jdj)
    return out


def build_liouvillian(model: LindbladModel) -> np.ndarray:
    """Superoperator matrix under the column-stacking convention."""
    d = model.dim
    eye = np.eye(d, dtype=complex)
    h = model.hamiltonian
    lv = -1j * (kron(eye, h) - kron(h.T, eye))
    for j in model.jumps:
        jdj = j.conj().T @ j
        lv += kron(j.conj(), j) - 0.5 * kron(eye, jdj) - 0.5 * kron(jdj.T, eye)
    return lv


@dataclass(frozen=True)
class LiouvillianSpectrum:
    matrix: np.ndarray
    eigenvalues: np.ndarray  # descending by real part; [0] is the stationary mode
    right_modes: tuple  # d x d matrices R_i
    left_modes: tuple  # d x d matrices L_i, normalized so Tr(L_i R_j) = delta_ij
    steady_state: DensityOperator
    dim: int = field(default=0)


def spectrum(model: LindbladModel) -> LiouvillianSpectrum:
    """Spectral decomposition of the generator with trace-paired eigenmodes.

    The stationary right mode is rescaled to unit trace (it is the steady
    state); its left partner then equals the identity.  Overlaps
    Tr(L_i rho) are exactly the coefficients of the eigenmode expansion.
    """
    d = model.dim
    lv = build_liouvillian(model)
    ge = gen_eig(lv)
    rights = []
    lefts = []
    for i in range(d * d):
        rights.append(unvec(ge.right_vectors[:, i], d))
        # Tr(L rho) with L = unvec(l)^H reproduces l^H vec(rho)
        lefts.append(unvec(ge.left_vectors[:, i], d).conj().T)
    tr0 = np.trace(rights[0])
    if abs(tr0) < 1e-12:
        raise ValueError("spectrum: stationary mode has zero trace")
    rights[0] = rights[0] / tr0
    lefts[0] = lefts[0] * tr0
    rho_ss = clean_state(rights[0])
    return LiouvillianSpectrum(
        matrix=lv,
        eigenvalues=ge.eigenvalues,
        right_modes=tuple(rights),
        left_modes=tuple(lefts),
        steady_state=rho_ss,
        dim=d,
    )


def mode_overlaps(spec: LiouvillianSpectrum, rho_in) -> np.ndarray:
    """Expansion coefficients Tr(L_i rho) for all modes."""
    m = as_matrix(rho_in)
    if m.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"state shape {m.shape} vs dim {spec.dim}")
    return np.array([np.trace(l @ m) for l in spec.left_modes])


def mpemba_overlap(spec: LiouvillianSpectrum, rho_in) -> complex:
    """Overlap Tr(L_1 rho) with the slowest decaying mode."""
    m = as_matrix(rho_in)
    if m.shape != (spec.dim, spec.dim):
        raise DimensionMismatch(f"state shape {m.shape} vs dim {spec.dim}")
    return complex(np.trace(spec.left_modes[1] @ m))


def propagate_modes(spec: LiouvillianSpectrum, rho_in, times) -> list[DensityOperator]:
    """Evolve through the eigenmode expansion: steady state plus decaying terms."""
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("propagate_modes: times must be nonnegative ascending")
    coeffs = mode_overlaps(spec, rho_in)
    decaying = np.stack(spec.right_modes[1:])
    lam = spec.eigenvalues[1:]
    ss = spec.steady_state.matrix
    out = []
    for t in times:
        weights = coeffs[1:] * np.exp(lam * t)
        m = ss + np.einsum("i,ijk->jk", weights, decaying)
        out.append(clean_state(m))
    return out


def integrate_direct(
    model: LindbladModel, rho_in, times, *, max_step: float = 2e-3
) -> list[DensityOperator]:
    """Fixed-step RK4 on the master equation itself (independent of the spectrum)."""
    times = np.asarray(times, dtype=float)
    if times.size and (times.min() < 0 or np.any(np.diff(times) < 0)):
        raise ValueError("integrate_direct: times must be nonnegative ascending")
    raw = rk4_fixed(lambda t, y: lindblad_rhs(model, y), as_matrix(rho_in), times, max_step)
    return [clean_state(m) for m in raw]
