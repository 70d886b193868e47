"""Pass 1: turn the mesh surface into lit sample points.

Points are stratified by triangle: each face receives a share of the budget
proportional to its area (largest-remainder rounding so the total is
exact), then uniform barycentric samples inside each face. Irradiance is
direct spot-light lighting with a shadow ray per point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from scatterkit.errors import EmptyMeshError, InvalidInputError
from scatterkit.materials.types import SurfaceSampleSet
from scatterkit.render.bvh import Bvh, build_bvh, intersect_any
from scatterkit.render.scene import SceneDescription

_SHADOW_BIAS = 1e-7


@dataclass(frozen=True)
class IrradiancePointSet:
    """Surface points with the irradiance (W/m^2, per channel) they receive."""

    points: SurfaceSampleSet
    irradiance: np.ndarray  # (count, 3)
    face_index: np.ndarray  # (count,) which triangle each point came from

    def __post_init__(self):
        irradiance = np.asarray(self.irradiance, dtype=np.float64)
        if irradiance.shape != (self.points.count, 3):
            raise InvalidInputError(
                f"irradiance shape {irradiance.shape} does not match {self.points.count} points"
            )
        face_index = np.asarray(self.face_index, dtype=np.int64)
        irradiance.setflags(write=False)
        face_index.setflags(write=False)
        object.__setattr__(self, "irradiance", irradiance)
        object.__setattr__(self, "face_index", face_index)

    @property
    def count(self) -> int:
        return self.points.count


def _allocate_by_area(areas: np.ndarray, total: int) -> np.ndarray:
    """Largest-remainder allocation of `total` samples proportional to area."""
    weights = areas / areas.sum()
    ideal = weights * total
    counts = np.floor(ideal).astype(np.int64)
    short = total - int(counts.sum())
    if short > 0:
        remainder = ideal - counts
        # ties broken by lower face index for determinism
        order = np.lexsort((np.arange(len(areas)), -remainder))
        counts[order[:short]] += 1
    return counts


def sample_irradiance_points(
    scene: SceneDescription, count: int, seed: int, bvh: Bvh | None = None
) -> IrradiancePointSet:
    """Scatter `count` lit sample points over the scene mesh.

    Deterministic per seed. Points facing away from the light, outside the
    spot cone, or shadowed by the mesh itself carry zero irradiance.
    """
    if count < 1:
        raise InvalidInputError("need a positive irradiance sample count")
    mesh = scene.mesh
    if mesh.triangle_count == 0:
        raise EmptyMeshError("cannot sample an empty mesh")
    if bvh is None:
        bvh = build_bvh(mesh)

    normals, areas = mesh.face_normals_and_areas()
    counts = _allocate_by_area(areas, count)
    face_index = np.repeat(np.arange(mesh.triangle_count), counts)

    rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(1,)))
    uv = rng.random((count, 2))
    flip = uv.sum(axis=1) > 1.0
    uv[flip] = 1.0 - uv[flip]

    p0, p1, p2 = mesh.corners()
    positions = (
        p0[face_index]
        + uv[:, :1] * (p1 - p0)[face_index]
        + uv[:, 1:] * (p2 - p0)[face_index]
    )
    point_normals = normals[face_index]
    # Constant area weight keeps the represented area equal to the mesh area
    # even when count < triangle_count (the preview default), where a
    # per-face A/m weight would drop every unsampled face from the estimate.
    per_point_area = np.full(count, areas.sum() / count)

    to_light = scene.light.position[None, :] - positions
    dist = np.linalg.norm(to_light, axis=1)
    wi = to_light / dist[:, None]
    cos_term = np.einsum("ij,ij->i", point_normals, wi)
    in_cone = -np.einsum("ij,j->i", wi, scene.light.direction) >= scene.light.cos_cone
    lit = (cos_term > 0.0) & in_cone & (dist > 0.0)

    visible = np.zeros(count, dtype=bool)
    if lit.any():
        origins = positions[lit] + point_normals[lit] * _SHADOW_BIAS
        occluded = intersect_any(
            bvh, origins, wi[lit], dist[lit] * (1.0 - 1e-6), t_near=1e-9
        )
        visible[lit] = ~occluded

    scale = np.where(visible, cos_term / (dist * dist), 0.0)
    irradiance = scale[:, None] * scene.light.intensity[None, :]

    points = SurfaceSampleSet(positions, point_normals, per_point_area)
    return IrradiancePointSet(points, irradiance, face_index)
