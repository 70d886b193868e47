"""Genetic-algorithm data types.

A chromosome is three genes, one log10(rho) per color channel. Working in
log space makes Gaussian mutation scale-appropriate for a knee parameter
that spans eight orders of magnitude.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

from scatterkit.errors import InvalidInputError
from scatterkit.factored.transform import RHO_MAX_DEFAULT, RHO_MIN_DEFAULT, TransformParams
from scatterkit.materials.types import CHANNELS, Channel

GENE_BOUNDS = (math.log10(RHO_MIN_DEFAULT), math.log10(RHO_MAX_DEFAULT))


@dataclass(frozen=True)
class Chromosome:
    genes: tuple[float, float, float]

    def __post_init__(self):
        genes = tuple(float(g) for g in self.genes)
        if len(genes) != 3:
            raise InvalidInputError(f"chromosome needs one gene per channel, got {len(genes)}")
        lo, hi = GENE_BOUNDS
        for g in genes:
            if not math.isfinite(g) or not (lo <= g <= hi):
                raise InvalidInputError(f"gene {g} outside [{lo}, {hi}]")
        object.__setattr__(self, "genes", genes)

    def rho(self) -> tuple[float, float, float]:
        return tuple(10.0**g for g in self.genes)

    def transform_params(self) -> dict[Channel, TransformParams]:
        return {c: TransformParams(10.0**g) for c, g in zip(CHANNELS, self.genes)}


@dataclass(frozen=True)
class FitnessReport:
    """Measured-space reconstruction error of one candidate. Lower is better."""

    rmse: float
    per_channel: tuple[float, float, float]
    clamped_entry_count: int


# Sentinel for candidates whose compression failed outright; they stay in the
# population with a maximal penalty so the GA bookkeeping never sees a hole.
WORST_FITNESS = FitnessReport(math.inf, (math.inf, math.inf, math.inf), 0)


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    best_rmse: float
    mean_rmse: float


@dataclass(frozen=True)
class GaConfig:
    population_size: int = 32
    max_generations: int = 50
    tournament_size: int = 2
    crossover_rate: float = 0.9
    mutation_rate: float = 0.1
    mutation_sigma: float = 0.25
    elitism_count: int = 1
    convergence_window: int = 10
    convergence_epsilon: float = 1e-6
    seed: int = 0

    def __post_init__(self):
        if self.population_size < 1:
            raise InvalidInputError("population_size must be positive")
        if self.max_generations < 1:
            raise InvalidInputError("max_generations must be positive")
        if self.tournament_size < 2:
            raise InvalidInputError("tournament_size must be at least 2")
        for name in ("crossover_rate", "mutation_rate"):
            rate = getattr(self, name)
            if not (0.0 <= rate <= 1.0):
                raise InvalidInputError(f"{name} must lie in [0, 1], got {rate}")
        if self.mutation_sigma <= 0.0:
            raise InvalidInputError("mutation_sigma must be positive")
        # The single-member population is a legal degenerate mode (the elite
        # just holds the line), so the strict < only applies beyond it.
        if self.elitism_count < 0 or (
            self.population_size > 1 and self.elitism_count >= self.population_size
        ):
            raise InvalidInputError(
                f"elitism_count {self.elitism_count} invalid for population "
                f"{self.population_size}"
            )
        if self.elitism_count > self.population_size:
            raise InvalidInputError("elitism_count cannot exceed population_size")
        if self.convergence_window < 1:
            raise InvalidInputError("convergence_window must be positive")
        if self.convergence_epsilon <= 0.0:
            raise InvalidInputError("convergence_epsilon must be positive")

    @classmethod
    def from_mapping(cls, section: dict) -> "GaConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(section) - known
        if unknown:
            raise InvalidInputError(f"unknown GA config keys: {sorted(unknown)}")
        return cls(**section)


@dataclass(frozen=True)
class EvolveResult:
    best: Chromosome
    best_fitness: FitnessReport
    history: tuple[GenerationStats, ...]
    converged: bool
