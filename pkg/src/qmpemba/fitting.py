"""Population time-series objective and the global fit driver.

Fit modes
---------
``seaqt5``
    (w1, w2, w3, w4, w5): effective Hamiltonian pair plus logistic
    relaxation-time coefficients.
``seaqt3``
    (w1, w2, tau_d): effective Hamiltonian pair plus a constant relaxation
    time (w1, w2 are typically held fixed).
``lindblad_rates``
    (kappa1, kappa2): decay rates of the open-system model.

Model populations are sampled on the data's own time grid via the
integrators' dense output; the data are never interpolated.
"""

from __future__ import annotations

import csv
import json
import logging
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.optimize import minimize

from .density import DensityOperator, populations
from .errors import ConfigError
from .hamiltonian import EffectiveParams, effective_hamiltonian
from .initial_states import resolve_state
from .lindblad import case_study_model, propagate_modes, spectrum
from .optimize import DEConfig, DEResult, differential_evolution
from .seaqt import ConstantTau, LogisticTau, SeaqtModel, integrate

log = logging.getLogger(__name__)

PENALTY = 1e6  # objective value substituted when a candidate's simulation fails

PARAM_NAMES = {
    "seaqt5": ("w1", "w2", "w3", "w4", "w5"),
    "seaqt3": ("w1", "w2", "tau_d"),
    "lindblad_rates": ("kappa1", "kappa2"),
}

DEFAULT_BOUNDS = {
    "seaqt5": ((0.5, 5.0), (0.001, 0.5), (0.5, 20.0), (0.0, 40.0), (0.0, 5.0)),
    "seaqt3": ((0.5, 5.0), (0.001, 0.5), (0.1, 100.0)),
    "lindblad_rates": ((0.1, 10.0), (1e-5, 0.1)),
}


@dataclass(frozen=True)
class PopulationSeries:
    times: np.ndarray
    populations: np.ndarray  # (n, 3)
    weights: np.ndarray | None = None

    def __post_init__(self):
        t = np.asarray(self.times, dtype=float)
        p = np.asarray(self.populations, dtype=float)
        if p.ndim != 2 or p.shape[1] != 3 or p.shape[0] != t.size:
            raise ConfigError(f"populations must be ({t.size}, 3), got {p.shape}")
        if t.size < 1 or np.any(np.diff(t) <= 0):
            raise ConfigError("times must be strictly increasing")
        sums = p.sum(axis=1)
        bad = np.abs(sums - 1.0) > 0.05
        if bad.any():
            k = int(np.argmax(bad))
            raise ConfigError(
                f"population row {k} sums to {sums[k]:.4f}, outside 1 +/- 0.05"
            )
        w = self.weights
        if w is not None:
            w = np.asarray(w, dtype=float)
            if w.shape != t.shape:
                raise ConfigError(f"weights shape {w.shape} != times shape {t.shape}")
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "populations", p)
        object.__setattr__(self, "weights", w)


@dataclass(frozen=True)
class FitProblem:
    mode: str
    bounds: tuple
    data: tuple  # of (initial-state label, PopulationSeries)
    rng_seed: int = 0
    fixed: tuple = ()  # (name, value) pairs pinning parameters out of the search
    eta: float = 1e-6
    rtol: float = 1e-8

    def __post_init__(self):
        if self.mode not in PARAM_NAMES:
            raise ConfigError(f"unknown fit mode {self.mode!r}")
        names = PARAM_NAMES[self.mode]
        b = tuple((float(lo), float(hi)) for lo, hi in self.bounds)
        if len(b) != len(names):
            raise ConfigError(f"mode {self.mode} needs {len(names)} bounds, got {len(b)}")
        fixed = tuple((str(n), float(v)) for n, v in self.fixed)
        for n, _ in fixed:
            if n not in names:
                raise ConfigError(f"fixed parameter {n!r} not in {names}")
        for (lo, hi), name in zip(b, names):
            if name in dict(fixed):
                continue
            if not (math.isfinite(lo) and math.isfinite(hi)) or lo >= hi:
                raise ConfigError(f"bound for {name} must satisfy low < high, got ({lo}, {hi})")
        if not self.data:
            raise ConfigError("fit problem has no data series")
        object.__setattr__(self, "bounds", b)
        object.__setattr__(self, "fixed", fixed)

    @property
    def param_names(self):
        return PARAM_NAMES[self.mode]

    def free_indices(self):
        pinned = dict(self.fixed)
        return [i for i, n in enumerate(self.param_names) if n not in pinned]

    def full_params(self, free_values) -> np.ndarray:
        pinned = dict(self.fixed)
        out = np.empty(len(self.param_names))
        it = iter(free_values)
        for i, n in enumerate(self.param_names):
            out[i] = pinned[n] if n in pinned else next(it)
        return out


def simulate_populations(mode, params, initial: DensityOperator, times, *, eta=1e-6, rtol=1e-8):
    """Model populations (n, 3) for one initial state on the data grid."""
    params = np.asarray(params, dtype=float)
    if mode == "seaqt5":
        h = effective_hamiltonian(EffectiveParams(params[0], params[1]))
        model = SeaqtModel(h, LogisticTau(params[2], params[3], params[4]))
        traj = integrate(model, initial, times, eta=eta, rtol=rtol)
        return np.stack([populations(s) for s in traj.states])
    if mode == "seaqt3":
        h = effective_hamiltonian(EffectiveParams(params[0], params[1]))
        model = SeaqtModel(h, ConstantTau(params[2]))
        traj = integrate(model, initial, times, eta=eta, rtol=rtol)
        return np.stack([populations(s) for s in traj.states])
    if mode == "lindblad_rates":
        model = case_study_model(kappa1=params[0], kappa2=params[1])
        states = propagate_modes(spectrum(model), initial, times)
        return np.stack([populations(s) for s in states])
    raise ConfigError(f"unknown fit mode {mode!r}")


def mse(params, problem: FitProblem) -> float:
    """Sum of squared population errors over all series, samples and levels.

    Simulation failures are mapped to a large finite penalty so the global
    search can traverse bad parameter regions.
    """
    total = 0.0
    for label, series in problem.data:
        try:
            model_pops = simulate_populations(
                problem.mode,
                params,
                resolve_state(label),
                series.times,
                eta=problem.eta,
                rtol=problem.rtol,
            )
        except Exception as exc:  # noqa: BLE001  (penalize, never abort the search)
            log.warning("simulation failed for %s at params %s: %s", label, params, exc)
            return PENALTY
        err = (model_pops - series.populations) ** 2
        if series.weights is not None:
            err = err * series.weights[:, None]
        total += float(err.sum())
    return total


@dataclass
class FitReport:
    mode: str
    param_names: tuple
    best_params: np.ndarray
    best_mse: float
    generations: int
    converged: bool
    population_trace: np.ndarray = field(repr=False)
    residuals_by_label: dict = field(default_factory=dict)
    n_evaluations: int = 0
    polished: bool = False

    def params_dict(self):
        return {n: float(v) for n, v in zip(self.param_names, self.best_params)}


def fit(problem: FitProblem, *, de: DEConfig | None = None, polish: bool = True) -> FitReport:
    """Differential-Evolution search over the free parameters, then a local polish."""
    free = problem.free_indices()
    if not free:
        raise ConfigError("all parameters are fixed; nothing to fit")
    free_bounds = [problem.bounds[i] for i in free]
    config = de if de is not None else DEConfig(seed=problem.rng_seed)

    def objective(free_values):
        return mse(problem.full_params(free_values), problem)

    result: DEResult = differential_evolution(objective, free_bounds, config)
    best_free = result.best_params
    best_val = result.best_value
    polished = False
    if polish:
        local = minimize(
            objective,
            best_free,
            method="Nelder-Mead",
            bounds=free_bounds,
            options={"xatol": 1e-10, "fatol": 1e-14, "maxiter": 3000, "maxfev": 4000},
        )
        if local.fun <= best_val:
            best_free, best_val = local.x, float(local.fun)
            polished = True

    best = problem.full_params(best_free)
    residuals = {
        label: mse(best, FitProblem(problem.mode, problem.bounds, ((label, series),),
                                    problem.rng_seed, problem.fixed, problem.eta, problem.rtol))
        for label, series in problem.data
    }
    return FitReport(
        mode=problem.mode,
        param_names=problem.param_names,
        best_params=best,
        best_mse=best_val,
        generations=result.generations,
        converged=result.converged,
        population_trace=result.trace,
        residuals_by_label=residuals,
        n_evaluations=result.n_evaluations,
        polished=polished,
    )


# --- data ingestion -----------------------------------------------------------


def load_series_csv(path) -> PopulationSeries:
    """Read `t,p0,p1,p2[,weight]` rows; errors carry row/column diagnostics."""
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise ConfigError(f"{path}: empty file") from None
        header = [h.strip().lower() for h in header]
        if header[:4] != ["t", "p0", "p1", "p2"] or len(header) > 5 or (
            len(header) == 5 and header[4] != "weight"
        ):
            raise ConfigError(
                f"{path}: header must be t,p0,p1,p2[,weight], got {','.join(header)}"
            )
        ncol = len(header)
        rows = []
        for k, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != ncol:
                raise ConfigError(f"{path}: row {k} has {len(row)} fields, expected {ncol}")
            vals = []
            for j, cell in enumerate(row):
                try:
                    vals.append(float(cell))
                except ValueError:
                    raise ConfigError(
                        f"{path}: row {k}, column {header[j]}: {cell!r} is not a number"
                    ) from None
            rows.append(vals)
    if not rows:
        raise ConfigError(f"{path}: no data rows")
    arr = np.asarray(rows)
    weights = arr[:, 4] if ncol == 5 else None
    return PopulationSeries(times=arr[:, 0], populations=arr[:, 1:4], weights=weights)


def load_manifest(path) -> FitProblem:
    """Build a FitProblem from a JSON manifest binding CSV files to state labels."""
    path = Path(path)
    try:
        doc = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc})") from exc
    if not isinstance(doc, dict):
        raise ConfigError(f"{path}: manifest must be a JSON object")
    if doc.get("schema_version") != 1:
        raise ConfigError(f"{path}: unsupported schema_version {doc.get('schema_version')!r}")
    mode = doc.get("mode")
    if mode not in PARAM_NAMES:
        raise ConfigError(f"{path}: mode must be one of {sorted(PARAM_NAMES)}, got {mode!r}")
    names = PARAM_NAMES[mode]
    bounds = list(DEFAULT_BOUNDS[mode])
    for name, pair in (doc.get("bounds") or {}).items():
        if name not in names:
            raise ConfigError(f"{path}: bound for unknown parameter {name!r}")
        bounds[names.index(name)] = (float(pair[0]), float(pair[1]))
    fixed = tuple((str(k), float(v)) for k, v in (doc.get("fixed") or {}).items())
    series_spec = doc.get("series")
    if not series_spec:
        raise ConfigError(f"{path}: manifest lists no data series")
    data = []
    for item in series_spec:
        label = item.get("initial")
        fname = item.get("file")
        if not label or not fname:
            raise ConfigError(f"{path}: each series needs 'initial' and 'file'")
        series = load_series_csv(path.parent / fname)
        if "weight" in item:
            w = float(item["weight"]) * np.ones_like(series.times)
            series = PopulationSeries(series.times, series.populations, w)
        data.append((label, series))
    return FitProblem(
        mode=mode,
        bounds=tuple(bounds),
        data=tuple(data),
        rng_seed=int(doc.get("seed", 0)),
        fixed=fixed,
        eta=float(doc.get("eta", 1e-6)),
        rtol=float(doc.get("rtol", 1e-8)),
    )
