"""Synthetic heterogeneous transport generator.

Produces a square grid of surface samples over a 0.1 m x 0.1 m patch and a
plausible transport matrix from a spatially varying extinction field:

    T[i, j] = exp(-0.5 * (sigma(x_i) + sigma(x_j)) * ||x_i - x_j||)

Averaging the endpoint extinctions keeps the matrix symmetric, which is what
reciprocity demands of measured transport. The three channels share one
field, so synthetic materials are gray; that is enough to exercise the
compression and rendering paths without inventing spectral detail.
"""

from __future__ import annotations

import enum
import math

import numpy as np

from scatterkit.errors import BadSampleCountError, InvalidInputError
from scatterkit.materials.types import CHANNELS, Channel, ScatteringMatrix, SurfaceSampleSet

PATCH_EXTENT = 0.1  # meters on each side

# Extinction levels, 1/m.
_UNIFORM_SIGMA = 50.0
_CHESS_LOW = 30.0
_CHESS_HIGH = 90.0
_MARBLE_BASE = 40.0
_MARBLE_VEIN = 120.0
_VEIN_THRESHOLD = 0.7  # quantile of the noise field turned into veins


class Pattern(str, enum.Enum):
    CHESSBOARD4 = "Chessboard4"
    CHESSBOARD8 = "Chessboard8"
    VEINED_MARBLE = "VeinedMarble"
    UNIFORM = "Uniform"


def grid_sample_set(n: int) -> SurfaceSampleSet:
    """The canonical g x g sample grid for a perfect-square count n.

    This is the layout synthetic materials (and factored archives derived
    from them) live on; loaders that only have a factored archive use it to
    recover sample positions.
    """
    n = int(n)
    if n < 16:
        raise BadSampleCountError(f"need at least 16 samples, got {n}")
    if math.isqrt(n) ** 2 != n:
        raise BadSampleCountError(f"sample count must be a perfect square, got {n}")
    return _grid_samples(n)


def _grid_samples(n: int) -> SurfaceSampleSet:
    g = math.isqrt(n)
    cell = PATCH_EXTENT / g
    coords = (np.arange(g) + 0.5) * cell
    xs, ys = np.meshgrid(coords, coords, indexing="xy")
    positions = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(n)])
    normals = np.tile([0.0, 0.0, 1.0], (n, 1))
    areas = np.full(n, cell * cell)
    return SurfaceSampleSet(positions, normals, areas)


def _chessboard_sigma(xy: np.ndarray, blocks: int) -> np.ndarray:
    cell = PATCH_EXTENT / blocks
    bx = np.floor(xy[:, 0] / cell).astype(int)
    by = np.floor(xy[:, 1] / cell).astype(int)
    dark = (bx + by) % 2 == 0
    return np.where(dark, _CHESS_LOW, _CHESS_HIGH)


def _marble_sigma(xy: np.ndarray, seed: int) -> np.ndarray:
    # Coarse value-noise lattice, bilinearly interpolated, thresholded into
    # veins. A fixed lattice size keeps the vein scale independent of n.
    lattice = 5
    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(7,)))
    knots = rng.random((lattice + 1, lattice + 1))
    u = np.clip(xy[:, 0] / PATCH_EXTENT, 0.0, 1.0) * lattice
    v = np.clip(xy[:, 1] / PATCH_EXTENT, 0.0, 1.0) * lattice
    u0 = np.minimum(u.astype(int), lattice - 1)
    v0 = np.minimum(v.astype(int), lattice - 1)
    fu = u - u0
    fv = v - v0
    a00 = knots[v0, u0]
    a10 = knots[v0, u0 + 1]
    a01 = knots[v0 + 1, u0]
    a11 = knots[v0 + 1, u0 + 1]
    value = (
        a00 * (1 - fu) * (1 - fv)
        + a10 * fu * (1 - fv)
        + a01 * (1 - fu) * fv
        + a11 * fu * fv
    )
    threshold = np.quantile(value, _VEIN_THRESHOLD)
    return np.where(value >= threshold, _MARBLE_VEIN, _MARBLE_BASE)


def extinction_field(positions: np.ndarray, pattern: Pattern, seed: int) -> np.ndarray:
    """Per-sample extinction sigma in 1/m for a pattern at given xy positions."""
    xy = positions[:, :2]
    if pattern is Pattern.UNIFORM:
        return np.full(xy.shape[0], _UNIFORM_SIGMA)
    if pattern is Pattern.CHESSBOARD4:
        return _chessboard_sigma(xy, 4)
    if pattern is Pattern.CHESSBOARD8:
        return _chessboard_sigma(xy, 8)
    if pattern is Pattern.VEINED_MARBLE:
        return _marble_sigma(xy, seed)
    raise InvalidInputError(f"unknown pattern {pattern!r}")


def synthesize_heterogeneous(
    n: int, pattern: Pattern, seed: int = 0
) -> tuple[SurfaceSampleSet, dict[Channel, ScatteringMatrix]]:
    """Generate a synthetic measured material with n samples.

    n must be a perfect square of at least 16 so the samples tile the patch
    as a g x g grid. The result is deterministic for a given (n, pattern,
    seed) triple; only VeinedMarble actually consumes the seed.
    """
    n = int(n)
    if n < 16:
        raise BadSampleCountError(f"need at least 16 samples, got {n}")
    g = math.isqrt(n)
    if g * g != n:
        raise BadSampleCountError(f"sample count must be a perfect square, got {n}")
    pattern = Pattern(pattern)

    samples = _grid_samples(n)
    sigma = extinction_field(samples.positions, pattern, seed)
    deltas = samples.positions[:, None, :] - samples.positions[None, :, :]
    dist = np.linalg.norm(deltas, axis=2)
    pair_sigma = 0.5 * (sigma[:, None] + sigma[None, :])
    values = np.exp(-pair_sigma * dist)

    matrices = {c: ScatteringMatrix(c, values) for c in CHANNELS}
    return samples, matrices
