"""GA operators: fitness, selection, crossover, mutation.

Every operator that consumes randomness draws a fixed amount from the
generator it is handed, whatever the outcome, so a caller can reason about
stream positions when partitioning seeds.
"""

from __future__ import annotations

from typing import Mapping, Sequence

import numpy as np

from scatterkit.errors import ConvergenceFailureError, InvalidInputError
from scatterkit.factored.model import compress, reconstruction_rmse
from scatterkit.ga.types import GENE_BOUNDS, WORST_FITNESS, Chromosome, FitnessReport
from scatterkit.materials.types import CHANNELS, Channel, ScatteringMatrix


def fitness(
    matrices: Mapping[Channel, ScatteringMatrix], chromosome: Chromosome, k: int
) -> FitnessReport:
    """Measured-space RMSE of compress-then-reconstruct under this chromosome.

    Compression failures (SVD non-convergence, inverse-transform overflow)
    come back as WORST_FITNESS rather than an exception so the population
    stays whole.
    """
    try:
        factored = compress(matrices, chromosome.transform_params(), k)
        rmse, per_channel, clamped = reconstruction_rmse(matrices, factored)
    except (ConvergenceFailureError, OverflowError):
        return WORST_FITNESS
    return FitnessReport(rmse, tuple(per_channel[c] for c in CHANNELS), clamped)


def select_tournament(
    rmses: Sequence[float], tournament_size: int, rng: np.random.Generator
) -> int:
    """Draw tournament_size distinct members uniformly; return the fittest.

    Ties break toward the lowest index, which keeps runs reproducible when a
    population contains duplicates.
    """
    n = len(rmses)
    if tournament_size > n:
        raise InvalidInputError(f"tournament size {tournament_size} exceeds population {n}")
    drawn = rng.choice(n, size=tournament_size, replace=False)
    drawn.sort()  # tie rule: lowest index wins among equals
    best = drawn[0]
    for idx in drawn[1:]:
        if rmses[idx] < rmses[best]:
            best = idx
    return int(best)


def _clamp(genes: np.ndarray) -> tuple[float, float, float]:
    lo, hi = GENE_BOUNDS
    return tuple(float(v) for v in np.clip(genes, lo, hi))


def crossover_blend(
    a: Chromosome, b: Chromosome, crossover_rate: float, rng: np.random.Generator
) -> tuple[Chromosome, Chromosome]:
    """Per-gene arithmetic blend with lambda ~ U(0,1); complementary children.

    When the crossover roll misses (probability 1 - crossover_rate) both
    parents are copied through unchanged.
    """
    fire = rng.random() < crossover_rate
    lam = rng.random(3)
    if not fire:
        return a, b
    ga = np.array(a.genes)
    gb = np.array(b.genes)
    c1 = lam * ga + (1.0 - lam) * gb
    c2 = (1.0 - lam) * ga + lam * gb
    return Chromosome(_clamp(c1)), Chromosome(_clamp(c2))


def mutate_gaussian(
    c: Chromosome, mutation_rate: float, mutation_sigma: float, rng: np.random.Generator
) -> Chromosome:
    """Perturb each gene by N(0, sigma^2) with probability mutation_rate, then clamp."""
    mask = rng.random(3) < mutation_rate
    noise = rng.normal(0.0, mutation_sigma, 3)
    if mutation_sigma == 0.0 or not mask.any():
        return c
    genes = np.array(c.genes) + mask * noise
    return Chromosome(_clamp(genes))
