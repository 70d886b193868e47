"""Triangle meshes and the built-in test shapes."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scatterkit.errors import InvalidInputError


@dataclass(frozen=True)
class TriangleMesh:
    """Indexed triangle soup. vertices (nv, 3) float64, faces (nf, 3) int32."""

    vertices: np.ndarray
    faces: np.ndarray

    def __post_init__(self):
        vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        faces = np.ascontiguousarray(self.faces, dtype=np.int32)
        if vertices.ndim != 2 or vertices.shape[1] != 3:
            raise InvalidInputError(f"vertices must be (nv, 3), got {vertices.shape}")
        if faces.ndim != 2 or faces.shape[1] != 3:
            raise InvalidInputError(f"faces must be (nf, 3), got {faces.shape}")
        if not np.all(np.isfinite(vertices)):
            raise InvalidInputError("vertices contain non-finite values")
        if faces.size and (faces.min() < 0 or faces.max() >= len(vertices)):
            raise InvalidInputError("face indices out of vertex range")
        vertices.setflags(write=False)
        faces.setflags(write=False)
        object.__setattr__(self, "vertices", vertices)
        object.__setattr__(self, "faces", faces)

    @property
    def triangle_count(self) -> int:
        return self.faces.shape[0]

    def corners(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """Per-face corner positions (p0, p1, p2), each (nf, 3)."""
        v = self.vertices
        f = self.faces
        return v[f[:, 0]], v[f[:, 1]], v[f[:, 2]]

    def face_normals_and_areas(self) -> tuple[np.ndarray, np.ndarray]:
        p0, p1, p2 = self.corners()
        cross = np.cross(p1 - p0, p2 - p0)
        double_area = np.linalg.norm(cross, axis=1)
        areas = 0.5 * double_area
        safe = np.where(double_area > 0.0, double_area, 1.0)[:, None]
        return cross / safe, areas

    def bounds(self) -> tuple[np.ndarray, np.ndarray]:
        return self.vertices.min(axis=0), self.vertices.max(axis=0)


def sphere_mesh(lat_bands: int = 64, lon_slices: int = 32, radius: float = 1.0) -> TriangleMesh:
    """Unit-style lat-long sphere at the origin.

    lat_bands horizontal strips and lon_slices meridians give
    2 * lon_slices * (lat_bands - 1) triangles; the default 64x32 comes to
    4032. Poles are shared vertices, caps are triangle fans.
    """
    if lat_bands < 2 or lon_slices < 3:
        raise InvalidInputError("need lat_bands >= 2 and lon_slices >= 3")
    vertices = [(0.0, 0.0, radius)]
    for band in range(1, lat_bands):
        theta = math.pi * band / lat_bands
        z = radius * math.cos(theta)
        ring = radius * math.sin(theta)
        for slice_ in range(lon_slices):
            phi = 2.0 * math.pi * slice_ / lon_slices
            vertices.append((ring * math.cos(phi), ring * math.sin(phi), z))
    vertices.append((0.0, 0.0, -radius))

    def ring_vertex(band, slice_):
        return 1 + (band - 1) * lon_slices + slice_ % lon_slices

    faces = []
    for s in range(lon_slices):
        faces.append((0, ring_vertex(1, s), ring_vertex(1, s + 1)))
    for band in range(1, lat_bands - 1):
        for s in range(lon_slices):
            a = ring_vertex(band, s)
            b = ring_vertex(band, s + 1)
            c = ring_vertex(band + 1, s)
            d = ring_vertex(band + 1, s + 1)
            faces.append((a, c, b))
            faces.append((b, c, d))
    south = len(vertices) - 1
    for s in range(lon_slices):
        faces.append((south, ring_vertex(lat_bands - 1, s + 1), ring_vertex(lat_bands - 1, s)))
    return TriangleMesh(np.array(vertices), np.array(faces, dtype=np.int32))


def standin_mesh() -> TriangleMesh:
    """Low-poly deformed blob standing in for user-supplied hero meshes.

    Deterministic: a coarse sphere with fixed-seed radial noise. Around 200
    triangles, enough to exercise shadowing and non-spherical projection
    without shipping a licensed asset.
    """
    base = sphere_mesh(9, 12, radius=1.0)
    rng = np.random.default_rng(np.random.SeedSequence(entropy=20_12, spawn_key=(3,)))
    radial = 1.0 + 0.35 * (rng.random(len(base.vertices)) - 0.5)
    vertices = base.vertices * radial[:, None]
    # squash z a little so it is clearly not a sphere
    vertices = vertices * np.array([1.0, 0.8, 0.65])
    return TriangleMesh(vertices, base.faces)
