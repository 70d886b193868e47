from scatterkit.ga.types import (
    GENE_BOUNDS,
    WORST_FITNESS,
    Chromosome,
    EvolveResult,
    FitnessReport,
    GaConfig,
    GenerationStats,
)
from scatterkit.ga.ops import crossover_blend, fitness, mutate_gaussian, select_tournament
from scatterkit.ga.evolve import evolve, save_history_csv

__all__ = [
    "Chromosome",
    "EvolveResult",
    "FitnessReport",
    "GENE_BOUNDS",
    "GaConfig",
    "GenerationStats",
    "WORST_FITNESS",
    "crossover_blend",
    "evolve",
    "fitness",
    "mutate_gaussian",
    "save_history_csv",
    "select_tournament",
]
