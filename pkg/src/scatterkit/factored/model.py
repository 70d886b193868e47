"""Factored transport model: per-channel rank-k factors plus the knee rho.

compress() runs forward transform then truncated SVD per channel;
reconstruct() inverts both steps. evaluate_pair() is the renderer's unit of
work: a single (receiver, source, channel) lookup costing exactly k
multiply-accumulates plus one expm1.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping

import numpy as np

from scatterkit.errors import DimensionMismatchError, InvalidInputError
from scatterkit.factored.svd import truncated_svd
from scatterkit.factored.transform import TransformParams, forward_transform, inverse_transform
from scatterkit.materials.types import CHANNELS, Channel, ScatteringMatrix

_ORTHO_ATOL = 1e-5


@dataclass(frozen=True)
class ChannelFactors:
    """Rank-k factors of one channel in the transformed domain.

    u : (n_i, k), orthonormal columns
    s : (k,), nonincreasing, nonnegative
    v : (n_o, k), orthonormal columns
    """

    params: TransformParams
    u: np.ndarray
    s: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        u = np.ascontiguousarray(self.u, dtype=np.float64)
        s = np.ascontiguousarray(self.s, dtype=np.float64)
        v = np.ascontiguousarray(self.v, dtype=np.float64)
        if u.ndim != 2 or v.ndim != 2 or s.ndim != 1:
            raise InvalidInputError("factors must be u (n_i,k), s (k,), v (n_o,k)")
        k = s.shape[0]
        if u.shape[1] != k or v.shape[1] != k:
            raise DimensionMismatchError(
                f"rank disagreement: u {u.shape}, s {s.shape}, v {v.shape}"
            )
        if k < 1 or k > min(u.shape[0], v.shape[0]):
            raise InvalidInputError(f"rank {k} invalid for {u.shape[0]}x{v.shape[0]} factors")
        if not (np.all(np.isfinite(u)) and np.all(np.isfinite(s)) and np.all(np.isfinite(v))):
            raise InvalidInputError("factors contain non-finite values")
        if np.any(s < 0.0) or np.any(np.diff(s) > 0.0):
            raise InvalidInputError("singular values must be nonnegative and nonincreasing")
        for mat, label in ((u, "u"), (v, "v")):
            gram = mat.T @ mat
            if not np.allclose(gram, np.eye(k), atol=_ORTHO_ATOL):
                raise InvalidInputError(f"{label} columns are not orthonormal within {_ORTHO_ATOL}")
        for arr in (u, s, v):
            arr.setflags(write=False)
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "v", v)
        # v with singular values folded in, so a pair lookup is k MACs.
        sv = v * s[None, :]
        sv.setflags(write=False)
        object.__setattr__(self, "_sv", sv)

    @property
    def k(self) -> int:
        return self.s.shape[0]

    @property
    def scaled_v(self) -> np.ndarray:
        """v * s, shape (n_o, k)."""
        return self._sv


@dataclass(frozen=True)
class FactoredBSSRDF:
    k: int
    channels: Mapping[Channel, ChannelFactors]

    def __post_init__(self):
        k = int(self.k)
        if k < 1:
            raise InvalidInputError(f"k must be a positive rank, got {k}")
        missing = [c.value for c in CHANNELS if c not in self.channels]
        if missing:
            raise InvalidInputError(f"missing channels: {missing}")
        dims = {(cf.u.shape[0], cf.v.shape[0]) for cf in self.channels.values()}
        if len(dims) != 1:
            raise DimensionMismatchError(f"channels disagree on dimensions: {sorted(dims)}")
        ranks = {cf.k for cf in self.channels.values()}
        if ranks != {k}:
            raise DimensionMismatchError(f"channel ranks {sorted(ranks)} do not all equal k={k}")
        object.__setattr__(self, "k", k)
        object.__setattr__(self, "channels", dict(self.channels))

    @property
    def n_receivers(self) -> int:
        return self.channels[Channel.R].u.shape[0]

    @property
    def n_sources(self) -> int:
        return self.channels[Channel.R].v.shape[0]


def compress(
    matrices: Mapping[Channel, ScatteringMatrix],
    params: Mapping[Channel, TransformParams],
    k: int,
) -> FactoredBSSRDF:
    """Transform each channel with its own rho and truncate to rank k."""
    channels = {}
    for channel in CHANNELS:
        if channel not in matrices or channel not in params:
            raise InvalidInputError(f"channel {channel.value} missing from inputs")
        y = forward_transform(matrices[channel].values, params[channel])
        u, s, v = truncated_svd(y, k)
        channels[channel] = ChannelFactors(params[channel], u, s, v)
    return FactoredBSSRDF(k, channels)


def _reconstruct_channel(cf: ChannelFactors) -> tuple[np.ndarray, int]:
    y = cf.u @ cf.scaled_v.T
    return inverse_transform(y, cf.params)


def reconstruct(
    factored: FactoredBSSRDF,
) -> tuple[dict[Channel, ScatteringMatrix], int]:
    """Expand the factors back to measured-domain matrices.

    Returns the per-channel matrices and the total number of entries that
    had to be clamped to zero.
    """
    matrices = {}
    clamped_total = 0
    for channel in CHANNELS:
        values, clamped = _reconstruct_channel(factored.channels[channel])
        matrices[channel] = ScatteringMatrix(channel, values)
        clamped_total += clamped
    return matrices, clamped_total


def evaluate_pair(factored: FactoredBSSRDF, i: int, j: int, channel: Channel) -> float:
    """Measured-domain transport between receiver i and source j, one channel.

    Cost is k multiply-accumulates plus one expm1; the result is clamped at
    zero exactly like a full reconstruction.
    """
    cf = factored.channels[channel]
    n_i, n_o = cf.u.shape[0], cf.v.shape[0]
    if not (0 <= i < n_i):
        raise IndexError(f"receiver index {i} outside [0, {n_i})")
    if not (0 <= j < n_o):
        raise IndexError(f"source index {j} outside [0, {n_o})")
    y = float(cf.u[i] @ cf.scaled_v[j])
    return max(cf.params.rho * np.expm1(y), 0.0)


def mac_terms_per_eval(factored: FactoredBSSRDF) -> int:
    """Multiply-accumulate terms one pair evaluation costs. Equals k."""
    return factored.k


def reconstruction_rmse(
    matrices: Mapping[Channel, ScatteringMatrix], factored: FactoredBSSRDF
) -> tuple[float, dict[Channel, float], int]:
    """Measured-space RMSE of the factored model against reference matrices.

    Returns (overall_rmse, per_channel_rmse, clamped_entry_count). Overall
    pools every entry of every channel with equal weight.
    """
    per_channel = {}
    total_sq = 0.0
    total_count = 0
    clamped_total = 0
    for channel in CHANNELS:
        ref = matrices[channel].values
        cf = factored.channels[channel]
        if ref.shape != (cf.u.shape[0], cf.v.shape[0]):
            raise DimensionMismatchError(
                f"channel {channel.value}: reference {ref.shape} vs factors "
                f"{(cf.u.shape[0], cf.v.shape[0])}"
            )
        approx, clamped = _reconstruct_channel(cf)
        err = approx - ref
        sq = float(np.sum(err * err))
        per_channel[channel] = float(np.sqrt(sq / err.size))
        total_sq += sq
        total_count += err.size
        clamped_total += clamped
    return float(np.sqrt(total_sq / total_count)), per_channel, clamped_total
