"""Generational GA loop with elitism and windowed early stopping.

Randomness is partitioned by numpy SeedSequence spawn keys: stream (0, i)
initializes individual i, stream (g, p) drives breeding pair p of
generation g. Every stream is derived from the config seed alone, so the
result is identical however fitness evaluations are scheduled.
"""

from __future__ import annotations

import csv
from pathlib import Path
from typing import Iterable, Mapping

import numpy as np

from scatterkit.errors import InvalidInputError
from scatterkit.ga.ops import crossover_blend, fitness, mutate_gaussian, select_tournament
from scatterkit.ga.types import (
    GENE_BOUNDS,
    Chromosome,
    EvolveResult,
    FitnessReport,
    GaConfig,
    GenerationStats,
)
from scatterkit.materials.types import Channel, ScatteringMatrix

_SEED_SPACE = 2**63


def _stream(seed: int, key: tuple[int, ...]) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=seed % _SEED_SPACE, spawn_key=key))


def evolve(
    matrices: Mapping[Channel, ScatteringMatrix], k: int, cfg: GaConfig
) -> EvolveResult:
    """Search for the per-channel rho minimizing reconstruction RMSE at rank k.

    Returns the best chromosome ever evaluated, its fitness, and one
    GenerationStats entry per evaluated generation (the initial population
    counts as generation 0). Stops early once neither the best nor the mean
    rmse improved by convergence_epsilon over the last convergence_window
    generations. Elitism of at least one member is required; it is what
    makes the per-generation best nonincreasing.
    """
    if cfg.elitism_count < 1:
        raise InvalidInputError("evolve requires elitism_count >= 1")
    lo, hi = GENE_BOUNDS
    n = cfg.population_size

    # Fitness is deterministic per chromosome, so elites and duplicates are
    # evaluated once.
    cache: dict[tuple[float, float, float], FitnessReport] = {}

    def evaluate(c: Chromosome) -> FitnessReport:
        report = cache.get(c.genes)
        if report is None:
            report = fitness(matrices, c, k)
            cache[c.genes] = report
        return report

    population = [
        Chromosome(tuple(_stream(cfg.seed, (0, i)).uniform(lo, hi, 3))) for i in range(n)
    ]
    reports = [evaluate(c) for c in population]

    best_idx = min(range(n), key=lambda i: (reports[i].rmse, i))
    best, best_report = population[best_idx], reports[best_idx]

    history = [_stats(0, reports)]
    converged = False

    for generation in range(1, cfg.max_generations):
        if _window_converged(history, cfg):
            converged = True
            break

        order = sorted(range(n), key=lambda i: (reports[i].rmse, i))
        next_population = [population[i] for i in order[: cfg.elitism_count]]

        rmses = [r.rmse for r in reports]
        pair = 0
        while len(next_population) < n:
            rng = _stream(cfg.seed, (generation, pair))
            pa = population[select_tournament(rmses, cfg.tournament_size, rng)]
            pb = population[select_tournament(rmses, cfg.tournament_size, rng)]
            c1, c2 = crossover_blend(pa, pb, cfg.crossover_rate, rng)
            c1 = mutate_gaussian(c1, cfg.mutation_rate, cfg.mutation_sigma, rng)
            c2 = mutate_gaussian(c2, cfg.mutation_rate, cfg.mutation_sigma, rng)
            next_population.append(c1)
            if len(next_population) < n:
                next_population.append(c2)
            pair += 1

        population = next_population
        reports = [evaluate(c) for c in population]
        history.append(_stats(generation, reports))

        gen_best = min(range(n), key=lambda i: (reports[i].rmse, i))
        if reports[gen_best].rmse < best_report.rmse:
            best, best_report = population[gen_best], reports[gen_best]

    return EvolveResult(best, best_report, tuple(history), converged)


def _stats(generation: int, reports) -> GenerationStats:
    rmses = np.array([r.rmse for r in reports])
    return GenerationStats(generation, float(rmses.min()), float(rmses.mean()))


def _window_converged(history, cfg: GaConfig) -> bool:
    # A stalled elite alone is not convergence: while selection still pulls
    # the population mean down the search is making progress and a better
    # candidate is likely ahead. Stop only when both series have flattened.
    w = cfg.convergence_window
    if len(history) <= w:
        return False
    eps = cfg.convergence_epsilon
    best_stalled = history[-1 - w].best_rmse - history[-1].best_rmse < eps
    mean_stalled = history[-1 - w].mean_rmse - history[-1].mean_rmse < eps
    return best_stalled and mean_stalled


def save_history_csv(history: Iterable[GenerationStats], path: str | Path) -> Path:
    """Write per-generation stats as CSV (generation, best_rmse, mean_rmse)."""
    path = Path(path)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["generation", "best_rmse", "mean_rmse"])
        for entry in history:
            writer.writerow([entry.generation, repr(entry.best_rmse), repr(entry.mean_rmse)])
    return path
