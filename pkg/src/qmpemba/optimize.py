"""Bound-constrained Differential Evolution (rand/1/bin, synchronous generations).

All randomness is drawn from a single seeded generator in a fixed order
before candidate evaluation, so results are reproducible for a given seed
regardless of how many worker threads evaluate the objective.
"""

from __future__ import annotations

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np


def worker_count() -> int:
    """Worker cap: MPEMBA_THREADS if set, else the available parallelism."""
    avail = os.cpu_count() or 1
    env = os.environ.get("MPEMBA_THREADS")
    if env:
        try:
            return max(1, min(int(env), avail))
        except ValueError:
            pass
    return avail


@dataclass(frozen=True)
class DEConfig:
    population_size: int | None = None  # default 15 * n_params
    mutation: float = 0.7
    crossover: float = 0.9
    max_generations: int = 1000
    tolerance: float = 1e-8
    seed: int = 0
    workers: int | None = 1  # None -> worker_count(); evaluations chunked across threads


@dataclass
class DEResult:
    best_params: np.ndarray
    best_value: float
    generations: int
    trace: np.ndarray = field(repr=False)  # best value per generation
    converged: bool = False
    n_evaluations: int = 0


def _check_bounds(bounds) -> tuple[np.ndarray, np.ndarray]:
    b = np.asarray(bounds, dtype=float)
    if b.ndim != 2 or b.shape[1] != 2 or b.shape[0] == 0:
        raise ValueError(f"bounds must be a nonempty sequence of (low, high), got {bounds!r}")
    low, high = b[:, 0], b[:, 1]
    if not (np.isfinite(low).all() and np.isfinite(high).all()):
        raise ValueError("bounds must be finite")
    if np.any(low >= high):
        raise ValueError("each bound must satisfy low < high")
    return low, high


def _evaluate(objective, pop, workers):
    if workers <= 1 or len(pop) < 2 * workers:
        vals = [objective(x) for x in pop]
    else:
        chunks = np.array_split(np.arange(len(pop)), workers)
        vals = [None] * len(pop)

        def run(idx):
            for i in idx:
                vals[i] = objective(pop[i])

        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run, chunks))
    arr = np.asarray(vals, dtype=float)
    return np.where(np.isnan(arr), np.inf, arr)


def differential_evolution(objective, bounds, config: DEConfig = DEConfig()) -> DEResult:
    """Minimize ``objective`` over a box; returns the best point found.

    Converges when the population spread falls below
    ``tolerance * |mean energy|``; otherwise stops at ``max_generations`` with
    ``converged = False`` (the best point found is still returned).
    """
    low, high = _check_bounds(bounds)
    n = len(low)
    size = config.population_size or 15 * n
    size = max(4, size)
    if config.population_size is not None and config.population_size < 4:
        raise ValueError("population_size must be at least 4")
    workers = config.workers if config.workers else worker_count()
    rng = np.random.default_rng(config.seed)

    pop = low + rng.random((size, n)) * (high - low)
    energies = _evaluate(objective, pop, workers)
    n_eval = size
    best_i = int(np.argmin(energies))
    trace = [float(energies[best_i])]

    converged = False
    gen = 0
    for gen in range(1, config.max_generations + 1):
        # draw all generation randomness up front (thread-count independent)
        partners = np.empty((size, 3), dtype=int)
        for i in range(size):
            choice = rng.choice(size - 1, size=3, replace=False)
            partners[i] = np.where(choice >= i, choice + 1, choice)
        cross = rng.random((size, n)) < config.crossover
        cross[np.arange(size), rng.integers(0, n, size=size)] = True

        mutants = pop[partners[:, 0]] + config.mutation * (
            pop[partners[:, 1]] - pop[partners[:, 2]]
        )
        np.clip(mutants, low, high, out=mutants)
        trials = np.where(cross, mutants, pop)

        trial_energies = _evaluate(objective, trials, workers)
        n_eval += size
        improved = trial_energies <= energies
        pop[improved] = trials[improved]
        energies[improved] = trial_energies[improved]

        best_i = int(np.argmin(energies))
        trace.append(float(energies[best_i]))
        finite = energies[np.isfinite(energies)]
        if len(finite) == size and np.std(finite) <= config.tolerance * abs(np.mean(finite)):
            converged = True
            break

    return DEResult(
        best_params=pop[best_i].copy(),
        best_value=float(energies[best_i]),
        generations=gen,
        trace=np.asarray(trace),
        converged=converged,
        n_evaluations=n_eval,
    )
