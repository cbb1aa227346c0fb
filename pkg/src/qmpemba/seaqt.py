"""Steepest-entropy-ascent dynamics for an isolated system.

The nonlinear equation of motion combines the unitary commutator term with a
dissipative term proportional to the anticommutator of the free-energy
fluctuation operator with the state.  Everything is evaluated in the
instantaneous eigenbasis of the state, where the entropy operator is diagonal
and all weighted covariances reduce to cheap contractions.

Units are dimensionless (hbar = k_B = 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Union

import numpy as np
from scipy.optimize import brentq

from .density import DensityOperator, clean_state
from .errors import (
    DegenerateVariance,
    EnergyOutOfRange,
    PositivityLoss,
    ZeroEntropyRate,
    ZeroTau,
)
from .integrators import rk45_adaptive
from .linalg import SUPPORT_CUTOFF, as_matrix

VARIANCE_FLOOR = 1e-12  # below this the inverse-temperature ratio is undefined
DEFAULT_ETA = 1e-6  # full-rank lift applied to rank-deficient initial states


# --- relaxation-time models -------------------------------------------------


@dataclass(frozen=True)
class ConstantTau:
    tau: float

    def __post_init__(self):
        if abs(self.tau) <= 1e-12:
            raise ZeroTau(f"constant relaxation time {self.tau:g} is too close to zero")


@dataclass(frozen=True)
class LogisticTau:
    """tau(t) = w3 / (1 + exp(-(w4 + w5 t)))."""

    w3: float
    w4: float
    w5: float


@dataclass(frozen=True)
class FluctuationDiagnostic:
    """Relaxation time read off the entropy-rate/fluctuation ratio.

    Not integrable on its own: it needs an entropy-rate estimate from an
    existing trajectory.
    """


RelaxationModel = Union[ConstantTau, LogisticTau, FluctuationDiagnostic]


def tau_eval(
    model: RelaxationModel,
    t: float = 0.0,
    *,
    rho=None,
    hamiltonian=None,
    entropy_rate_estimate: float | None = None,
) -> float:
    """Evaluate the relaxation time at time t (and state, for the diagnostic form)."""
    if isinstance(model, ConstantTau):
        return model.tau
    if isinstance(model, LogisticTau):
        x = model.w4 + model.w5 * t
        if x < -700.0:  # exp overflow guard; the limit is exactly 0
            return 0.0
        return model.w3 / (1.0 + math.exp(-x))
    if isinstance(model, FluctuationDiagnostic):
        if rho is None or hamiltonian is None:
            raise ZeroTau("fluctuation-ratio form needs a state and Hamiltonian")
        if entropy_rate_estimate is None or abs(entropy_rate_estimate) < 1e-300:
            raise ZeroEntropyRate("fluctuation-ratio form needs a nonzero entropy rate")
        obs = observables(rho, hamiltonian, strict=False)
        return (obs.sigma_ss - obs.beta**2 * obs.sigma_hh) / entropy_rate_estimate
    raise TypeError(f"unknown relaxation model {model!r}")


# --- state moments and observables -------------------------------------------


class _Moments:
    """Eigenbasis data of a state plus the covariances against a Hamiltonian."""

    __slots__ = ("w", "v", "hp", "s", "energy", "entropy",
                 "sigma_hh", "sigma_hs", "sigma_ss")

    def __init__(self, rho_mat, h, kernel_count=None):
        w, v = np.linalg.eigh(rho_mat)
        if kernel_count is None:
            support = w > SUPPORT_CUTOFF
        else:
            support = np.ones(len(w), dtype=bool)
            support[:kernel_count] = False
        s = np.zeros_like(w)
        s[support] = -np.log(w[support])
        hp = v.conj().T @ h @ v
        hd = hp.diagonal().real
        energy = float(w @ hd)
        entropy = float(w @ s)
        h2 = float(w @ (np.abs(hp) ** 2).sum(axis=1))
        hs = float(w @ (hd * s))
        s2 = float(w @ s**2)
        self.w, self.v, self.hp, self.s = w, v, hp, s
        self.energy = energy
        self.entropy = entropy
        self.sigma_hh = h2 - energy * energy
        self.sigma_hs = hs - energy * entropy
        self.sigma_ss = s2 - entropy * entropy


@dataclass(frozen=True)
class ThermoObservables:
    energy: float
    entropy: float
    beta: float  # nan when the energy variance degenerates
    sigma_hh: float
    sigma_hs: float
    sigma_ss: float
    sigma_ff: float  # nan when beta is zero or undefined
    sigma_fs: float
    heat_capacity: float
    entropy_rate: float  # nan unless a relaxation time was supplied
    free_energy: float  # <H> - <S>/beta
    beta_defined: bool

    @property
    def phi_seaqt(self) -> float:
        """Dynamical order parameter: variance of the free-energy operator."""
        return self.sigma_ff

    @property
    def entropy_production_coefficient(self) -> float:
        """beta^2 sigma_FF, finite even where sigma_ff itself overflows."""
        return self.sigma_ss - self.beta**2 * self.sigma_hh


def _observables_from_moments(mom: _Moments, tau_d=None, strict=True) -> ThermoObservables:
    if mom.sigma_hh <= VARIANCE_FLOOR:
        if strict:
            raise DegenerateVariance(
                f"energy variance {mom.sigma_hh:.3e} <= {VARIANCE_FLOOR:g}; "
                "inverse temperature undefined"
            )
        beta = math.nan
        defined = False
    else:
        beta = mom.sigma_hs / mom.sigma_hh
        defined = True
    if defined and beta != 0.0:
        sigma_fs = mom.sigma_hs - mom.sigma_ss / beta
        sigma_ff = mom.sigma_hh - 2.0 * mom.sigma_hs / beta + mom.sigma_ss / beta**2
        free_energy = mom.energy - mom.entropy / beta
    else:
        sigma_fs = math.nan
        sigma_ff = math.nan
        free_energy = math.nan
    heat_capacity = beta**2 * mom.sigma_hh if defined else math.nan
    if tau_d is not None and defined:
        entropy_rate = (mom.sigma_ss - beta**2 * mom.sigma_hh) / tau_d
    else:
        entropy_rate = math.nan
    return ThermoObservables(
        energy=mom.energy,
        entropy=mom.entropy,
        beta=beta,
        sigma_hh=mom.sigma_hh,
        sigma_hs=mom.sigma_hs,
        sigma_ss=mom.sigma_ss,
        sigma_ff=sigma_ff,
        sigma_fs=sigma_fs,
        heat_capacity=heat_capacity,
        entropy_rate=entropy_rate,
        free_energy=free_energy,
        beta_defined=defined,
    )


def observables(rho, hamiltonian, *, tau_d=None, strict=True) -> ThermoObservables:
    """Nonequilibrium thermodynamic snapshot of a state against a Hamiltonian."""
    mom = _Moments(as_matrix(rho), as_matrix(hamiltonian))
    return _observables_from_moments(mom, tau_d=tau_d, strict=strict)


def dissipation_operator(rho, hamiltonian) -> np.ndarray:
    """Anticommutator form of the dissipation operator, (beta/2){Delta f, rho}.

    Evaluated as (1/2){beta DeltaH - DeltaS, rho}, which needs no division by
    beta and is therefore well defined also at beta = 0.
    """
    mom = _Moments(as_matrix(rho), as_matrix(hamiltonian))
    if mom.sigma_hh <= VARIANCE_FLOOR:
        raise DegenerateVariance(f"energy variance {mom.sigma_hh:.3e} too small")
    beta = mom.sigma_hs / mom.sigma_hh
    g = beta * mom.hp - np.diag(mom.s)
    np.fill_diagonal(g, g.diagonal() - (beta * mom.energy - mom.entropy))
    d = 0.5 * g * (mom.w[:, None] + mom.w[None, :])
    return mom.v @ d @ mom.v.conj().T


@dataclass(frozen=True)
class SeaqtModel:
    hamiltonian: np.ndarray
    relaxation: RelaxationModel

    def __post_init__(self):
        h = as_matrix(self.hamiltonian)
        if np.linalg.norm(h - h.conj().T) > 1e-9 * max(1.0, np.linalg.norm(h)):
            raise ValueError("SeaqtModel: Hamiltonian must be Hermitian")
        object.__setattr__(self, "hamiltonian", h)


def _rhs_matrix(mom: _Moments, tau: float) -> np.ndarray:
    """Equation-of-motion right-hand side in the state eigenbasis, rotated back."""
    beta = mom.sigma_hs / mom.sigma_hh
    g = beta * mom.hp - np.diag(mom.s)
    np.fill_diagonal(g, g.diagonal() - (beta * mom.energy - mom.entropy))
    unitary = -1j * (mom.hp * mom.w[None, :] - mom.w[:, None] * mom.hp)
    m = unitary - (0.5 / tau) * g * (mom.w[:, None] + mom.w[None, :])
    return mom.v @ m @ mom.v.conj().T


def eom_rhs(rho, model: SeaqtModel, t: float) -> np.ndarray:
    """d(rho)/dt: unitary term minus the entropy-ascent dissipation over tau."""
    tau = tau_eval(model.relaxation, t)
    if abs(tau) <= 1e-12:
        raise ZeroTau(f"relaxation time {tau:g} at t = {t:g}")
    mom = _Moments(as_matrix(rho), model.hamiltonian)
    if mom.sigma_hh <= VARIANCE_FLOOR:
        raise DegenerateVariance(f"energy variance {mom.sigma_hh:.3e} too small")
    return _rhs_matrix(mom, tau)


@dataclass
class SeaqtTrajectory:
    times: np.ndarray
    states: list  # DensityOperator per sample
    observables: list  # ThermoObservables per sample
    stats: dict

    @property
    def samples(self):
        return list(zip(self.states, self.observables))


def integrate(
    model: SeaqtModel,
    rho_in,
    times,
    *,
    rtol: float = 1e-8,
    atol: float = 1e-10,
    eta: float = DEFAULT_ETA,
    max_step: float = np.inf,
) -> SeaqtTrajectory:
    """Adaptively integrate the equation of motion, sampling at ``times``.

    Rank-deficient initial states are lifted to full rank by mixing in
    eta * identity/d (reported in the stats); with eta = 0 the initial rank
    is preserved instead by pinning the kernel classification, re-detected
    only if a pinned eigenvalue grows past 10x the support cutoff.
    """
    times = np.asarray(times, dtype=float)
    if times.size < 1 or np.any(np.diff(times) < 0) or times[0] < 0:
        raise ValueError("integrate: times must be nonnegative ascending")
    h = model.hamiltonian
    d = h.shape[0]
    rho0 = as_matrix(rho_in)
    w0 = np.linalg.eigvalsh(rho0)
    eta_applied = 0.0
    if eta > 0.0 and w0.min() <= 10 * SUPPORT_CUTOFF:
        rho0 = (1.0 - eta) * rho0 + (eta / d) * np.eye(d, dtype=complex)
        w0 = np.linalg.eigvalsh(rho0)
        eta_applied = eta
    rank = int(np.count_nonzero(w0 > SUPPORT_CUTOFF))
    kernel_count = d - rank if rank < d else None
    tracker = {"kernel_count": kernel_count}

    relax = model.relaxation
    if isinstance(relax, FluctuationDiagnostic):
        raise ZeroTau("the fluctuation-ratio relaxation model is diagnostic only; "
                      "integrate with a constant or logistic model")

    stats = {
        "eta_applied": eta_applied,
        "positivity_events": 0,
        "entropy_violations": 0,
        "negative_tau": False,
        "max_trace_drift": 0.0,
        "min_eigenvalue": float(w0.min()),
    }
    last = {"entropy": None, "tau_positive": None}

    def rhs(t, y):
        tau = tau_eval(relax, t)
        if abs(tau) <= 1e-12:
            raise ZeroTau(f"relaxation time {tau:g} at t = {t:g}")
        if tau < 0:
            stats["negative_tau"] = True
        mom = _Moments(y, h, kernel_count=tracker["kernel_count"])
        if mom.sigma_hh <= VARIANCE_FLOOR:
            raise DegenerateVariance(
                f"energy variance {mom.sigma_hh:.3e} degenerated at t = {t:g}"
            )
        return _rhs_matrix(mom, tau)

    def monitor(t, y):
        y = 0.5 * (y + y.conj().T)
        w = np.linalg.eigvalsh(y)
        wmin = float(w.min())
        stats["min_eigenvalue"] = min(stats["min_eigenvalue"], wmin)
        stats["max_trace_drift"] = max(stats["max_trace_drift"], abs(float(w.sum()) - 1.0))
        if wmin < -1e-3:
            raise PositivityLoss(f"eigenvalue {wmin:.3e} at t = {t:g}")
        if wmin < -1e-6:
            stats["positivity_events"] += 1
            w = np.clip(w, 0.0, None)
            _, v = np.linalg.eigh(y)
            y = (v * (w / w.sum())) @ v.conj().T
        kc = tracker["kernel_count"]
        if kc and np.any(w[:kc] > 10 * SUPPORT_CUTOFF):
            tracker["kernel_count"] = d - int(np.count_nonzero(w > SUPPORT_CUTOFF)) or None
        ws = w[w > SUPPORT_CUTOFF]
        entropy = float(-(ws * np.log(ws)).sum())
        tau_positive = tau_eval(relax, t) > 0
        if (
            last["entropy"] is not None
            and last["tau_positive"]
            and tau_positive
            and entropy < last["entropy"] - 1e-9
        ):
            stats["entropy_violations"] += 1
        last["entropy"] = entropy
        last["tau_positive"] = tau_positive
        return y

    raw, int_stats = rk45_adaptive(
        rhs, rho0, times, rtol=rtol, atol=atol, max_step=max_step, monitor=monitor
    )
    stats.update(int_stats)

    states = []
    obs = []
    for t, m in zip(times, raw):
        m = 0.5 * (m + m.conj().T)
        stats["max_trace_drift"] = max(
            stats["max_trace_drift"], abs(float(np.trace(m).real) - 1.0)
        )
        mom = _Moments(m, h, kernel_count=tracker["kernel_count"])
        stats["min_eigenvalue"] = min(stats["min_eigenvalue"], float(mom.w.min()))
        tau_here = tau_eval(relax, t)
        obs.append(_observables_from_moments(mom, tau_d=tau_here, strict=False))
        states.append(clean_state(m))
    energies = np.array([o.energy for o in obs])
    stats["max_energy_drift"] = float(np.abs(energies - energies[0]).max())
    return SeaqtTrajectory(times=times, states=states, observables=obs, stats=stats)


# --- canonical equilibrium ----------------------------------------------------


@dataclass(frozen=True)
class GibbsState:
    beta_eq: float
    partition: float
    state: DensityOperator


def gibbs_state(hamiltonian, beta: float) -> DensityOperator:
    """exp(-beta H)/Z, computed stably in the eigenbasis of H."""
    h = as_matrix(hamiltonian)
    w, v = np.linalg.eigh(h)
    x = np.exp(-beta * (w - (w.min() if beta >= 0 else w.max())))
    p = x / x.sum()
    return DensityOperator((v * p) @ v.conj().T)


def partition_function(hamiltonian, beta: float) -> float:
    w = np.linalg.eigvalsh(as_matrix(hamiltonian))
    return float(np.exp(-beta * w).sum())


def equilibrium_state(hamiltonian, energy: float) -> GibbsState:
    """Gibbs state whose mean energy equals ``energy`` (beta may be negative)."""
    h = as_matrix(hamiltonian)
    w = np.linalg.eigvalsh(h)
    wmin, wmax = float(w.min()), float(w.max())
    if not (wmin < energy < wmax):
        raise EnergyOutOfRange(
            f"energy {energy:g} outside the open spectral interval ({wmin:g}, {wmax:g})"
        )

    def mean_energy(beta):
        x = np.exp(-beta * (w - (w.min() if beta >= 0 else w.max())))
        return float((w @ x) / x.sum())

    # mean_energy is strictly decreasing in beta; expand the bracket as needed
    lo, hi = -1.0, 1.0
    while mean_energy(lo) < energy:
        lo *= 2.0
        if lo < -1e6:
            raise EnergyOutOfRange(f"energy {energy:g} unreachable (too close to max)")
    while mean_energy(hi) > energy:
        hi *= 2.0
        if hi > 1e6:
            raise EnergyOutOfRange(f"energy {energy:g} unreachable (too close to min)")
    beta_eq = brentq(lambda b: mean_energy(b) - energy, lo, hi, xtol=1e-13, rtol=8.9e-16)
    return GibbsState(
        beta_eq=float(beta_eq),
        partition=partition_function(h, beta_eq),
        state=gibbs_state(h, beta_eq),
    )
