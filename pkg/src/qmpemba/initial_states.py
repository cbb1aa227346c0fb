"""Initial-condition factory: catalog states and the constrained Mpemba-state search.

A Mpemba state is a pure state whose overlap with the slowest decaying
Liouvillian mode vanishes.  Normalization, purity and zero entropy hold by
construction (the search runs over two angles and two relative phases, with
the leading amplitude kept real and nonnegative); only the overlap (and an
optional population target) is minimized.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize

from .density import DensityOperator, from_pure, populations, von_neumann_entropy
from .errors import Infeasible
from .lindblad import LiouvillianSpectrum
from .optimize import DEConfig, differential_evolution

CATALOG_AMPLITUDES = {
    "ket0": (0.96, 0.003, 0.03),
    "ket2": (0.03, 0.003, 0.967),
    "sme": (0.8, 0.176 + 0.283j, 0.196 - 0.459j),
}
CATALOG_ROWS = ("ket0", "ket2", "sme")


def table1_state(row: str) -> DensityOperator:
    """Catalog pure state by label (amplitudes renormalized)."""
    key = row.lower()
    if key not in CATALOG_AMPLITUDES:
        raise KeyError(f"unknown state label {row!r}; expected one of {CATALOG_ROWS}")
    return from_pure(CATALOG_AMPLITUDES[key])


def resolve_state(spec) -> DensityOperator:
    """Turn a label, an amplitude triple, or a state into a DensityOperator."""
    if isinstance(spec, DensityOperator):
        return spec
    if isinstance(spec, str):
        if spec.lower() in CATALOG_AMPLITUDES:
            return table1_state(spec)
        parts = spec.split(",")
        if len(parts) != 3:
            raise ValueError(
                f"initial state {spec!r} is neither a known label {CATALOG_ROWS} "
                "nor three comma-separated amplitudes"
            )
        return from_pure([complex(p.strip().replace("i", "j")) for p in parts])
    return from_pure(spec)


@dataclass(frozen=True)
class SmeConstraints:
    target_populations: tuple | None = None
    overlap_tolerance: float = 1e-8
    entropy_tolerance: float = 1e-9

    def __post_init__(self):
        if self.overlap_tolerance <= 0 or self.entropy_tolerance <= 0:
            raise ValueError("tolerances must be positive")
        if self.target_populations is not None:
            t = tuple(float(x) for x in self.target_populations)
            if len(t) != 3 or min(t) < 0:
                raise ValueError(f"target_populations must be 3 nonnegative values, got {t}")
            object.__setattr__(self, "target_populations", t)


@dataclass(frozen=True)
class SmeResult:
    amplitudes: np.ndarray
    state: DensityOperator
    overlap: complex
    residuals: dict


def _amplitudes(x) -> np.ndarray:
    t1, t2, p1, p2 = x
    return np.array(
        [
            np.cos(t1),
            np.sin(t1) * np.cos(t2) * np.exp(1j * p1),
            np.sin(t1) * np.sin(t2) * np.exp(1j * p2),
        ]
    )


def _result(spec, amps, constraints) -> SmeResult:
    state = from_pure(amps)
    m = state.matrix
    overlap = complex(np.trace(spec.left_modes[1] @ m))
    rho2 = m @ m
    residuals = {
        "norm": abs(float(np.linalg.norm(amps)) - 1.0),
        "trace": abs(float(np.trace(m).real) - 1.0),
        "purity": float(np.linalg.norm(rho2 - m)),
        "entropy": von_neumann_entropy(state),
        "overlap": abs(overlap),
    }
    if constraints.target_populations is not None:
        residuals["population_mismatch"] = float(
            np.abs(populations(state) - np.asarray(constraints.target_populations)).max()
        )
    return SmeResult(amplitudes=amps, state=state, overlap=overlap, residuals=residuals)


def _search_once(spec, constraints, seed) -> SmeResult:
    l1 = spec.left_modes[1]
    target = (
        None
        if constraints.target_populations is None
        else np.asarray(constraints.target_populations, dtype=float)
    )

    def objective(x):
        psi = _amplitudes(x)
        val = abs(psi.conj() @ (l1 @ psi)) ** 2
        if target is not None:
            val += float(((np.abs(psi) ** 2 - target) ** 2).sum())
        return val

    bounds = [(0.0, np.pi / 2), (0.0, np.pi / 2), (0.0, 2 * np.pi), (0.0, 2 * np.pi)]
    de = differential_evolution(
        objective,
        bounds,
        DEConfig(population_size=40, max_generations=150, tolerance=1e-12, seed=seed),
    )
    polished = minimize(
        objective,
        de.best_params,
        method="Nelder-Mead",
        options={"xatol": 1e-13, "fatol": 1e-28, "maxiter": 4000, "maxfev": 6000},
    )
    best = polished.x if polished.fun <= de.best_value else de.best_params
    return _result(spec, _amplitudes(best), constraints)


def find_sme(
    spec: LiouvillianSpectrum,
    constraints: SmeConstraints = SmeConstraints(),
    seed: int = 0,
    *,
    max_attempts: int = 5,
) -> SmeResult:
    """Search for a pure state with vanishing slow-mode overlap (deterministic per seed)."""
    children = np.random.SeedSequence(seed).spawn(max_attempts)
    best = None
    for child in children:
        res = _search_once(spec, constraints, child)
        if best is None or res.residuals["overlap"] < best.residuals["overlap"]:
            best = res
        if _satisfies(res, constraints):
            return res
    raise Infeasible(
        f"no state met the overlap bound {constraints.overlap_tolerance:g} after "
        f"{max_attempts} attempts (best residuals: {best.residuals})",
        residuals=best.residuals,
    )


def _satisfies(res: SmeResult, constraints: SmeConstraints) -> bool:
    ok = (
        res.residuals["overlap"] <= constraints.overlap_tolerance
        and res.residuals["entropy"] <= constraints.entropy_tolerance
        and res.residuals["purity"] <= 1e-10
    )
    if constraints.target_populations is not None:
        ok = ok and res.residuals["population_mismatch"] <= 1e-6
    return ok


def random_sme_ensemble(
    spec: LiouvillianSpectrum,
    constraints: SmeConstraints,
    count: int,
    seed: int = 0,
) -> list[SmeResult]:
    """Generate ``count`` distinct feasible states (pairwise HS distance > 1e-6)."""
    if count < 1:
        raise ValueError("count must be >= 1")
    budget = 4 * count
    children = iter(np.random.SeedSequence(seed).spawn(budget))
    out: list[SmeResult] = []
    attempts = 0
    while len(out) < count and attempts < budget:
        attempts += 1
        res = _search_once(spec, constraints, next(children))
        if not _satisfies(res, constraints):
            continue
        if any(np.linalg.norm(res.state.matrix - o.state.matrix) <= 1e-6 for o in out):
            continue
        out.append(res)
    if len(out) < count:
        raise Infeasible(
            f"found only {len(out)}/{count} feasible distinct states in {budget} attempts"
        )
    return out
