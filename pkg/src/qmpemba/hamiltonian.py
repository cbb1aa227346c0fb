"""Four-level block Hamiltonian and its reduction to the effective three-level one.

The auxiliary short-lived level is eliminated by block inversion against a
free energy denominator epsilon, leaving a rank-1 correction on the retained
levels.  In dimensionless form the correction is parameterized by a pair
(w1, w2); the ground-state couplings stay fixed at (1, 0.06).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NegativeProduct, SingularEpsilon

OMEGA1 = 1.0
OMEGA2 = 0.06


@dataclass(frozen=True)
class FourLevelParams:
    omega1: float  # |0>-|1> coupling
    omega2: float  # |0>-|2> coupling
    omega1p: float  # |1>-|aux> coupling
    omega2p: float  # |2>-|aux> coupling
    detuning: float  # |0>-|aux> detuning
    gamma: float  # aux emission rate
    epsilon: float  # elimination denominator (aux energy minus E)

    def __post_init__(self):
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")
        if self.omega1 <= 0:
            raise ValueError(f"omega1 must be positive, got {self.omega1}")


@dataclass(frozen=True)
class EffectiveParams:
    w1: float
    w2: float

    def __post_init__(self):
        if self.w1 * self.w2 < 0:
            raise NegativeProduct(
                f"w1*w2 = {self.w1 * self.w2:g} < 0: sqrt(w1*w2) entry would be imaginary"
            )


def full_hamiltonian(p: FourLevelParams) -> np.ndarray:
    """4x4 Hamiltonian with the auxiliary level retained."""
    return 0.5 * np.array(
        [
            [0, p.omega1, p.omega2, 0],
            [p.omega1, 0, 0, p.omega1p],
            [p.omega2, 0, 0, p.omega2p],
            [0, p.omega1p, p.omega2p, p.detuning],
        ],
        dtype=complex,
    )


def system_block(p: FourLevelParams) -> np.ndarray:
    """The retained 3x3 block (no auxiliary coupling)."""
    return 0.5 * np.array(
        [[0, p.omega1, p.omega2], [p.omega1, 0, 0], [p.omega2, 0, 0]],
        dtype=complex,
    )


def project(p: FourLevelParams) -> np.ndarray:
    """Eliminate the auxiliary level: H_S - H_SP epsilon^-1 H_PS.

    The correction is the rank-1 outer product of the coupling column; the
    energy dependence of the exact denominator is not iterated (epsilon is a
    free parameter absorbed into the effective couplings downstream).
    """
    if abs(p.epsilon) <= 1e-12:
        raise SingularEpsilon(f"epsilon = {p.epsilon:g} is too close to zero")
    coupling = 0.5 * np.array([0, p.omega1p, p.omega2p], dtype=complex)
    return system_block(p) - np.outer(coupling, coupling.conj()) / p.epsilon


def effective_params_from(p: FourLevelParams) -> EffectiveParams:
    """(w1, w2) = (Omega_1P^2, Omega_2P^2) / (2 epsilon Omega_1)."""
    if abs(p.epsilon) <= 1e-12:
        raise SingularEpsilon(f"epsilon = {p.epsilon:g} is too close to zero")
    denom = 2.0 * p.epsilon * p.omega1
    return EffectiveParams(p.omega1p**2 / denom, p.omega2p**2 / denom)


def effective_hamiltonian(e: EffectiveParams) -> np.ndarray:
    """Dimensionless effective 3x3 Hamiltonian parameterized by (w1, w2)."""
    if e.w1 * e.w2 < 0:
        raise NegativeProduct(f"w1*w2 = {e.w1 * e.w2:g} < 0")
    cross = np.sqrt(e.w1 * e.w2)
    return 0.5 * np.array(
        [
            [0, OMEGA1, OMEGA2],
            [OMEGA1, -e.w1, -cross],
            [OMEGA2, -cross, -e.w2],
        ],
        dtype=complex,
    )


def coupling_from_rates(omega1: float, gamma: float, a: float = 1.0, b: float = 1.0):
    """Auxiliary couplings implied by the decay rates.

    Omega_1P = sqrt(2 a gamma Omega_1) reproduces kappa_1 = 2 Omega_1 through
    kappa ~ Omega_P^2 / gamma; the |2> channel carries the 0.0015 factor.
    The proportionality constants a, b default to 1.
    """
    return (
        float(np.sqrt(2.0 * a * gamma * omega1)),
        float(np.sqrt(0.0015 * b * gamma * omega1)),
    )
