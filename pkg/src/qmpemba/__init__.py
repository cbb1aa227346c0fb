"""Quantum Mpemba toolkit for a driven three-level system.

Two dynamical routes for the same case study: the linear Markovian master
equation (spectrally decomposed into relaxation eigenmodes) and the nonlinear
steepest-entropy-ascent equation of motion for the isolated, effectively
projected system.  Plus: constrained construction of accelerated-relaxation
initial states and Differential Evolution fitting of free parameters to
population time series.
"""

from .density import (
    DensityOperator,
    covariance,
    entropy_context,
    expectation,
    from_pure,
    hs_distance,
    maximally_mixed,
    populations,
    von_neumann_entropy,
    weighted_inner,
)
from .fitting import FitProblem, FitReport, PopulationSeries, fit, mse
from .hamiltonian import (
    EffectiveParams,
    FourLevelParams,
    coupling_from_rates,
    effective_hamiltonian,
    full_hamiltonian,
    project,
)
from .initial_states import (
    SmeConstraints,
    SmeResult,
    find_sme,
    random_sme_ensemble,
    table1_state,
)
from .lindblad import (
    LindbladModel,
    LiouvillianSpectrum,
    build_liouvillian,
    case_study_model,
    integrate_direct,
    mpemba_overlap,
    propagate_modes,
    spectrum,
)
from .optimize import DEConfig, DEResult, differential_evolution
from .seaqt import (
    ConstantTau,
    FluctuationDiagnostic,
    GibbsState,
    LogisticTau,
    SeaqtModel,
    ThermoObservables,
    dissipation_operator,
    eom_rhs,
    equilibrium_state,
    gibbs_state,
    integrate,
    observables,
    tau_eval,
)

__version__ = "0.1.0"

__all__ = [
    "DensityOperator", "covariance", "entropy_context", "expectation", "from_pure",
    "hs_distance", "maximally_mixed", "populations", "von_neumann_entropy",
    "weighted_inner",
    "FitProblem", "FitReport", "PopulationSeries", "fit", "mse",
    "EffectiveParams", "FourLevelParams", "coupling_from_rates",
    "effective_hamiltonian", "full_hamiltonian", "project",
    "SmeConstraints", "SmeResult", "find_sme", "random_sme_ensemble", "table1_state",
    "LindbladModel", "LiouvillianSpectrum", "build_liouvillian", "case_study_model",
    "integrate_direct", "mpemba_overlap", "propagate_modes", "spectrum",
    "DEConfig", "DEResult", "differential_evolution",
    "ConstantTau", "FluctuationDiagnostic", "GibbsState", "LogisticTau", "SeaqtModel",
    "ThermoObservables", "dissipation_operator", "eom_rhs", "equilibrium_state",
    "gibbs_state", "integrate", "observables", "tau_eval",
]
