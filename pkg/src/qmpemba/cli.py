"""Command-line surface: configure models, run simulations and fits, emit CSV/JSON.

Exit codes: 0 success, 2 configuration/validation error, 3 numerical failure.
Outputs are byte-identical for identical config and seed.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .density import hs_distance, populations
from .errors import (
    ConfigError,
    DegeneratePairing,
    EnergyOutOfRange,
    Infeasible,
    NoConvergence,
    PositivityLoss,
    StepSizeUnderflow,
)
from .fitting import load_manifest, fit
from .hamiltonian import EffectiveParams, effective_hamiltonian
from .initial_states import (
    CATALOG_ROWS,
    SmeConstraints,
    find_sme,
    random_sme_ensemble,
    resolve_state,
    table1_state,
)
from .lindblad import case_study_model, integrate_direct, propagate_modes, spectrum
from .optimize import DEConfig
from .seaqt import (
    ConstantTau,
    LogisticTau,
    SeaqtModel,
    equilibrium_state,
    integrate,
    observables,
    tau_eval,
)

TRAJECTORY_COLUMNS = (
    "t", "p0", "p1", "p2", "energy", "entropy", "beta", "beta_defined",
    "heat_capacity", "sigma_ff", "free_energy", "tau_d", "hs_dist_final",
)

SCHEMA_VERSION = 1

# default effective-Hamiltonian pair and rates for the case study
DEFAULT_W1 = 2.53
DEFAULT_W2 = 0.026
NUMERICAL_ERRORS = (
    StepSizeUnderflow,
    PositivityLoss,
    NoConvergence,
    DegeneratePairing,
    EnergyOutOfRange,
    Infeasible,
)


def _fmt(x) -> str:
    """17 significant digits: round-trip exact for doubles."""
    if x is None or (isinstance(x, float) and math.isnan(x)):
        return "nan"
    return format(float(x), ".17g")


def write_trajectory_csv(path, rows):
    with Path(path).open("w", newline="") as fh:
        fh.write(",".join(TRAJECTORY_COLUMNS) + "\n")
        for row in rows:
            fh.write(",".join(_fmt(row[c]) if c != "beta_defined" else str(int(row[c]))
                              for c in TRAJECTORY_COLUMNS) + "\n")


def write_json(path, doc):
    Path(path).write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True) + "\n")


@dataclass
class RunConfig:
    framework: str = "both"
    w1: float = DEFAULT_W1
    w2: float = DEFAULT_W2
    relaxation: dict | None = None
    kappa1: float = 2.0
    kappa2: float = 0.0015
    initial: str = "ket0"
    t_max: float = 20.0
    samples: int = 201
    seed: int = 0
    output_dir: str = "."
    eta: float = 1e-6
    rtol: float = 1e-8
    schema_version: int = SCHEMA_VERSION

    def validate(self):
        if self.schema_version != SCHEMA_VERSION:
            raise ConfigError(f"unsupported schema_version {self.schema_version}")
        if self.framework not in ("seaqt", "lindblad", "both"):
            raise ConfigError(f"framework must be seaqt|lindblad|both, got {self.framework!r}")
        if not self.t_max > 0:
            raise ConfigError(f"t_max must be positive, got {self.t_max}")
        if self.samples < 2:
            raise ConfigError(f"samples must be >= 2, got {self.samples}")
        if self.framework in ("seaqt", "both") and self.relaxation is None:
            raise ConfigError("a relaxation model is required for the seaqt framework "
                              "(--tau-const or --tau-logistic or config 'relaxation')")
        if self.relaxation is not None:
            self.relaxation_model()  # raises on malformed specs
        resolve_state(self.initial)

    def relaxation_model(self):
        spec = self.relaxation
        try:
            kind = spec["kind"]
            if kind == "constant":
                return ConstantTau(float(spec["tau"]))
            if kind == "logistic":
                return LogisticTau(float(spec["w3"]), float(spec["w4"]), float(spec["w5"]))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"malformed relaxation spec {spec!r}: {exc}") from exc
        raise ConfigError(f"relaxation kind must be constant|logistic, got {kind!r}")

    def echo(self) -> dict:
        doc = dict(self.__dict__)
        return doc


def load_run_config(path, overrides: dict) -> RunConfig:
    doc = {}
    if path:
        try:
            doc = json.loads(Path(path).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        if not isinstance(doc, dict):
            raise ConfigError(f"{path}: config must be a JSON object")
        unknown = set(doc) - set(RunConfig.__dataclass_fields__)
        if unknown:
            raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    doc.update({k: v for k, v in overrides.items() if v is not None})
    try:
        cfg = RunConfig(**doc)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    cfg.validate()
    return cfg


def _trajectory_rows(times, states, obs_list, tau_values, reference):
    rows = []
    for t, state, obs, tau in zip(times, states, obs_list, tau_values):
        p = populations(state)
        rows.append({
            "t": t,
            "p0": p[0], "p1": p[1], "p2": p[2],
            "energy": obs.energy,
            "entropy": obs.entropy,
            "beta": obs.beta,
            "beta_defined": obs.beta_defined,
            "heat_capacity": obs.heat_capacity,
            "sigma_ff": obs.sigma_ff,
            "free_energy": obs.free_energy,
            "tau_d": tau,
            "hs_dist_final": hs_distance(state, reference),
        })
    return rows


def run_seaqt(cfg: RunConfig, times):
    h = effective_hamiltonian(EffectiveParams(cfg.w1, cfg.w2))
    relax = cfg.relaxation_model()
    model = SeaqtModel(h, relax)
    rho_in = resolve_state(cfg.initial)
    traj = integrate(model, rho_in, times, rtol=cfg.rtol, eta=cfg.eta)
    conserved = traj.observables[0].energy
    try:
        reference = equilibrium_state(h, conserved).state
        ref_kind = "gibbs_at_conserved_energy"
    except EnergyOutOfRange:
        reference = traj.states[-1]
        ref_kind = "final_sample"
    taus = [tau_eval(relax, t) for t in times]
    rows = _trajectory_rows(times, traj.states, traj.observables, taus, reference)
    entropy = np.array([o.entropy for o in traj.observables])
    tau_pos = np.array([tau > 0 for tau in taus])
    drops = (np.diff(entropy) < -1e-9) & tau_pos[:-1] & tau_pos[1:]
    summary = {
        "max_trace_drift": traj.stats["max_trace_drift"],
        "max_energy_drift": traj.stats["max_energy_drift"],
        "min_eigenvalue": traj.stats["min_eigenvalue"],
        "entropy_monotonicity_violations": int(drops.sum()) + traj.stats["entropy_violations"],
        "positivity_events": traj.stats["positivity_events"],
    }
    violations = (
        summary["entropy_monotonicity_violations"]
        + summary["positivity_events"]
        + int(summary["max_trace_drift"] > 1e-9)
        + int(summary["max_energy_drift"] > 1e-6)
        + int(summary["min_eigenvalue"] < -1e-8)
    )
    meta = {
        "eta_applied": traj.stats["eta_applied"],
        "negative_tau": traj.stats["negative_tau"],
        "integrator": {k: traj.stats[k] for k in ("n_steps", "n_rejected", "n_rhs")},
        "invariant_checks": summary,
        "invariant_violations": violations,
        "hs_reference": ref_kind,
    }
    return rows, meta


def run_lindblad(cfg: RunConfig, times):
    model = case_study_model(kappa1=cfg.kappa1, kappa2=cfg.kappa2)
    rho_in = resolve_state(cfg.initial)
    try:
        spec = spectrum(model)
        states = propagate_modes(spec, rho_in, times)
        path = "eigenmodes"
        reference = spec.steady_state
    except DegeneratePairing:
        states = integrate_direct(model, rho_in, times)
        path = "direct"
        reference = states[-1]
    h = model.hamiltonian
    obs_list = [observables(s, h, strict=False) for s in states]
    taus = [math.nan] * len(times)
    rows = _trajectory_rows(times, states, obs_list, taus, reference)
    t0_err = hs_distance(states[0], rho_in)
    meta = {
        "propagation_path": path,
        "invariant_checks": {"t0_reconstruction_error": t0_err},
        "invariant_violations": int(t0_err > 1e-8),
    }
    return rows, meta


def cmd_simulate(args) -> int:
    overrides = {
        "framework": args.framework,
        "initial": args.initial,
        "t_max": args.t_max,
        "samples": args.samples,
        "seed": args.seed,
        "output_dir": args.output_dir,
        "w1": args.w1,
        "w2": args.w2,
        "kappa1": args.kappa1,
        "kappa2": args.kappa2,
        "eta": args.eta,
        "rtol": args.rtol,
    }
    if args.tau_const is not None:
        overrides["relaxation"] = {"kind": "constant", "tau": args.tau_const}
    elif args.tau_logistic is not None:
        try:
            w3, w4, w5 = (float(v) for v in args.tau_logistic.split(","))
        except ValueError:
            raise ConfigError(
                f"--tau-logistic needs w3,w4,w5 — got {args.tau_logistic!r}"
            ) from None
        overrides["relaxation"] = {"kind": "logistic", "w3": w3, "w4": w4, "w5": w5}
    cfg = load_run_config(args.config, overrides)

    outdir = Path(cfg.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    times = np.linspace(0.0, cfg.t_max, cfg.samples)
    meta = {"config": cfg.echo(), "outputs": {}}
    frameworks = ("seaqt", "lindblad") if cfg.framework == "both" else (cfg.framework,)
    for fw in frameworks:
        rows, fw_meta = run_seaqt(cfg, times) if fw == "seaqt" else run_lindblad(cfg, times)
        csv_path = outdir / f"trajectory_{fw}.csv"
        write_trajectory_csv(csv_path, rows)
        meta[fw] = fw_meta
        meta["outputs"][fw] = csv_path.name
    write_json(outdir / "metadata.json", meta)
    return 0


def cmd_spectrum(args) -> int:
    model = case_study_model(
        kappa1=args.kappa1 if args.kappa1 is not None else 2.0,
        kappa2=args.kappa2 if args.kappa2 is not None else 0.0015,
    )
    spec = spectrum(model)
    eigen = []
    for lam in spec.eigenvalues:
        eigen.append({
            "re": float(lam.real),
            "im": float(lam.imag),
            "decay_time": (-1.0 / lam.real) if lam.real < -1e-14 else None,
        })
    overlaps = {}
    for label in CATALOG_ROWS:
        c = np.trace(spec.left_modes[1] @ table1_state(label).matrix)
        overlaps[label] = {"re": float(c.real), "im": float(c.imag), "abs": float(abs(c))}
    # the catalog amplitudes are rounded to three decimals, so their slow-mode
    # overlap is only ~1e-3; a freshly searched state carries the sharp value
    sme_opt = find_sme(spec, seed=args.seed)
    c = sme_opt.overlap
    overlaps["sme_optimized"] = {
        "re": float(c.real), "im": float(c.imag), "abs": float(abs(c)),
    }
    ss = spec.steady_state.matrix
    doc = {
        "schema_version": SCHEMA_VERSION,
        "eigenvalues": eigen,
        "steady_state": {"real": ss.real.tolist(), "imag": ss.imag.tolist()},
        "slow_mode_overlaps": overlaps,
    }
    if args.output:
        write_json(args.output, doc)
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_fit(args) -> int:
    problem = load_manifest(args.manifest)
    if args.seed is not None:
        problem = dataclasses.replace(problem, rng_seed=args.seed)
    de = DEConfig(
        population_size=args.population_size,
        max_generations=args.max_generations,
        seed=problem.rng_seed,
        workers=args.workers,
    )
    report = fit(problem, de=de, polish=not args.no_polish)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "mode": report.mode,
        "best_params": report.params_dict(),
        "best_mse": report.best_mse,
        "generations": report.generations,
        "converged": report.converged,
        "polished": report.polished,
        "n_evaluations": report.n_evaluations,
        "residuals_by_label": report.residuals_by_label,
        "population_trace": [float(v) for v in report.population_trace],
    }
    if args.output:
        write_json(args.output, doc)
    else:
        json.dump(doc, sys.stdout, indent=2, sort_keys=True)
        sys.stdout.write("\n")
    return 0


def cmd_sme_search(args) -> int:
    if args.count < 1:
        raise ConfigError(f"--count must be >= 1, got {args.count}")
    outdir = Path(args.output_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    model = case_study_model()
    spec = spectrum(model)
    constraints = SmeConstraints(overlap_tolerance=args.overlap_tol)
    members = random_sme_ensemble(spec, constraints, args.count, seed=args.seed)
    doc = []
    for k, res in enumerate(members):
        doc.append({
            "index": k,
            "amplitudes": [[float(a.real), float(a.imag)] for a in res.amplitudes],
            "populations": [float(p) for p in populations(res.state)],
            "overlap": {
                "re": float(res.overlap.real),
                "im": float(res.overlap.imag),
                "abs": float(abs(res.overlap)),
            },
            "residuals": {k2: float(v) for k2, v in res.residuals.items()},
        })
    write_json(outdir / "ensemble.json", {"schema_version": SCHEMA_VERSION, "states": doc})
    if args.propagate:
        times = np.linspace(0.0, args.t_max, args.samples)
        h = effective_hamiltonian(EffectiveParams(DEFAULT_W1, DEFAULT_W2))
        relax = ConstantTau(args.tau_const)
        for k, res in enumerate(members):
            states = propagate_modes(spec, res.state, times)
            obs = [observables(s, model.hamiltonian, strict=False) for s in states]
            rows = _trajectory_rows(times, states, obs, [math.nan] * len(times),
                                    spec.steady_state)
            write_trajectory_csv(outdir / f"sme_{k:03d}_lindblad.csv", rows)
            traj = integrate(SeaqtModel(h, relax), res.state, times)
            try:
                ref = equilibrium_state(h, traj.observables[0].energy).state
            except EnergyOutOfRange:
                ref = traj.states[-1]
            taus = [tau_eval(relax, t) for t in times]
            rows = _trajectory_rows(times, traj.states, traj.observables, taus, ref)
            write_trajectory_csv(outdir / f"sme_{k:03d}_seaqt.csv", rows)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmpemba",
        description="Three-level quantum Mpemba toolkit: simulate, analyze, fit.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", help="integrate a trajectory and write CSV + metadata")
    sim.add_argument("--config", help="JSON config file (flags override its values)")
    sim.add_argument("--framework", choices=("seaqt", "lindblad", "both"))
    sim.add_argument("--initial", help=f"state label {CATALOG_ROWS} or 'a0,a1,a2' amplitudes")
    sim.add_argument("--t-max", dest="t_max", type=float)
    sim.add_argument("--samples", type=int)
    sim.add_argument("--seed", type=int)
    sim.add_argument("--output-dir", dest="output_dir")
    sim.add_argument("--w1", type=float, help="effective Hamiltonian coefficient")
    sim.add_argument("--w2", type=float, help="effective Hamiltonian coefficient")
    sim.add_argument("--kappa1", type=float)
    sim.add_argument("--kappa2", type=float)
    sim.add_argument("--tau-const", dest="tau_const", type=float)
    sim.add_argument("--tau-logistic", dest="tau_logistic", metavar="W3,W4,W5")
    sim.add_argument("--eta", type=float, help="full-rank lift for singular initial states")
    sim.add_argument("--rtol", type=float)
    sim.set_defaults(func=cmd_simulate)

    spc = sub.add_parser("spectrum", help="Liouvillian eigenvalues, steady state, overlaps")
    spc.add_argument("--kappa1", type=float)
    spc.add_argument("--kappa2", type=float)
    spc.add_argument("--seed", type=int, default=0, help="seed for the optimized-sme entry")
    spc.add_argument("--output")
    spc.set_defaults(func=cmd_spectrum)

    fitp = sub.add_parser("fit", help="fit free parameters to population time series")
    fitp.add_argument("manifest", help="JSON manifest binding CSV files to initial states")
    fitp.add_argument("--seed", type=int)
    fitp.add_argument("--population-size", dest="population_size", type=int)
    fitp.add_argument("--max-generations", dest="max_generations", type=int, default=1000)
    fitp.add_argument("--workers", type=int, default=1)
    fitp.add_argument("--no-polish", dest="no_polish", action="store_true")
    fitp.add_argument("--output")
    fitp.set_defaults(func=cmd_fit)

    sme = sub.add_parser("sme-search", help="generate zero-overlap initial states")
    sme.add_argument("--count", type=int, default=1)
    sme.add_argument("--seed", type=int, default=0)
    sme.add_argument("--output-dir", dest="output_dir", default=".")
    sme.add_argument("--overlap-tol", dest="overlap_tol", type=float, default=1e-8)
    sme.add_argument("--propagate", action="store_true",
                     help="also write per-state trajectories under both frameworks")
    sme.add_argument("--t-max", dest="t_max", type=float, default=20.0)
    sme.add_argument("--samples", type=int, default=201)
    sme.add_argument("--tau-const", dest="tau_const", type=float, default=1.3176)
    sme.set_defaults(func=cmd_sme_search)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"qmpemba: configuration error: {exc}", file=sys.stderr)
        return 2
    except NUMERICAL_ERRORS as exc:
        print(f"qmpemba: numerical failure: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
