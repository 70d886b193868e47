"""Pass 2 inner loop: exitant radiance at a shading point.

    L_c = (1/pi) * sum_j T_c(i_point, j) * E_j,c * A_j

with T evaluated through the factored model (k multiply-accumulates per
term) or the dipole. Two routes exist deliberately: the public
``gather_exitant_radiance`` spells the sum out term by term through
``evaluate_pair`` and is the reference; ``GatherState`` is the vectorized
equivalent the renderer runs, accumulating per singular component so the
arithmetic cost stays visibly proportional to k. Tests pin the two routes
together.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scatterkit.dipole import diffuse_reflectance
from scatterkit.errors import InvalidInputError
from scatterkit.factored.model import evaluate_pair
from scatterkit.materials.types import CHANNELS
from scatterkit.render.sampling import IrradiancePointSet
from scatterkit.render.scene import DipoleBinding, FactoredBinding, MaterialBinding


def gather_exitant_radiance(
    shading_point: np.ndarray,
    irradiance_points: IrradiancePointSet,
    binding: MaterialBinding,
    sample_mapper=None,
    truncation_radius: float | None = None,
) -> tuple[np.ndarray, int]:
    """Reference gather at one shading point.

    Returns (per-channel radiance, bssrdf_eval_count contribution). The
    count is gather terms times k for a factored binding, gather terms for
    a dipole. Terms beyond truncation_radius are skipped entirely.
    """
    point = np.asarray(shading_point, dtype=np.float64)
    positions = irradiance_points.points.positions
    energy = irradiance_points.irradiance * irradiance_points.points.areas[:, None]

    keep = slice(None)
    if truncation_radius is not None:
        dist = np.linalg.norm(positions - point[None, :], axis=1)
        keep = dist <= truncation_radius

    out = np.zeros(3)
    if isinstance(binding, DipoleBinding):
        r = np.linalg.norm(positions[keep] - point[None, :], axis=1)
        rd = diffuse_reflectance(binding.material, r)
        out = np.einsum("jc,jc->c", rd, energy[keep]) / math.pi
        terms = rd.shape[0]
        return out, terms

    if not isinstance(binding, FactoredBinding):
        raise InvalidInputError(f"unknown material binding {type(binding).__name__}")
    if sample_mapper is None:
        raise InvalidInputError("factored gather needs a sample index mapper")
    i = int(sample_mapper(point[None, :])[0])
    j_indices = sample_mapper(positions[keep])
    kept_energy = energy[keep]
    for row, j in enumerate(j_indices):
        for ci, channel in enumerate(CHANNELS):
            t = evaluate_pair(binding.factored, i, int(j), channel)
            out[ci] += t * kept_energy[row, ci]
    terms = len(j_indices)
    return out / math.pi, terms * binding.factored.k


@dataclass
class GatherState:
    """Precomputed per-render tensors for the vectorized gather.

    sv : (k, 3, J) singular component j-profiles, s_c[t] * v_c[jmat, t]
    u  : (n_receivers, 3, k) receiver factors
    w  : (3, J) rho_c * E_j,c * A_j / pi, the constant gather weights
    """

    sv: np.ndarray
    u: np.ndarray
    w: np.ndarray
    k: int
    positions: np.ndarray
    truncation_radius: float | None

    @classmethod
    def for_factored(
        cls,
        binding: FactoredBinding,
        irr: IrradiancePointSet,
        sample_mapper,
        truncation_radius: float | None,
    ) -> "GatherState":
        f = binding.factored
        k = f.k
        jmat = sample_mapper(irr.points.positions)
        energy = irr.irradiance * irr.points.areas[:, None]  # (J, 3)
        sv = np.empty((k, 3, irr.count))
        w = np.empty((3, irr.count))
        u = np.empty((f.n_receivers, 3, k))
        for ci, channel in enumerate(CHANNELS):
            cf = f.channels[channel]
            sv[:, ci, :] = cf.scaled_v[jmat].T
            w[ci] = cf.params.rho * energy[:, ci] / math.pi
            u[:, ci, :] = cf.u
        return cls(sv, u, w, k, irr.points.positions, truncation_radius)

    def radiance_at(self, point: np.ndarray, receiver_index: int) -> tuple[np.ndarray, int]:
        """Gather at one shading point. Returns (radiance (3,), term count).

        One fused multiply-add per singular component keeps the per-point
        cost k-proportional; the expm1/clamp tail is k-independent.
        """
        ui = self.u[receiver_index]  # (3, k)
        sv = self.sv
        y = ui[:, 0:1] * sv[0]
        for t in range(1, self.k):
            y = y + ui[:, t : t + 1] * sv[t]
        np.maximum(y, 0.0, out=y)
        x = np.expm1(y)
        if self.truncation_radius is None:
            return np.einsum("cj,cj->c", x, self.w), self.w.shape[1]
        dist = np.linalg.norm(self.positions - point[None, :], axis=1)
        mask = dist <= self.truncation_radius
        return np.einsum("cj,cj->c", x[:, mask], self.w[:, mask]), int(mask.sum())


@dataclass
class DipoleGatherState:
    """Vectorized dipole gather: distance-based, no sample indices."""

    binding: DipoleBinding
    positions: np.ndarray
    w: np.ndarray  # (J, 3) E*A/pi
    truncation_radius: float | None

    @classmethod
    def for_dipole(
        cls, binding: DipoleBinding, irr: IrradiancePointSet, truncation_radius: float | None
    ) -> "DipoleGatherState":
        w = irr.irradiance * irr.points.areas[:, None] / math.pi
        return cls(binding, irr.points.positions, w, truncation_radius)

    def radiance_at(self, point: np.ndarray, receiver_index: int = -1) -> tuple[np.ndarray, int]:
        delta = self.positions - point[None, :]
        dist = np.linalg.norm(delta, axis=1)
        if self.truncation_radius is None:
            rd = diffuse_reflectance(self.binding.material, dist)
            return np.einsum("jc,jc->c", rd, self.w), dist.shape[0]
        mask = dist <= self.truncation_radius
        rd = diffuse_reflectance(self.binding.material, dist[mask])
        return np.einsum("jc,jc->c", rd, self.w[mask]), int(mask.sum())
