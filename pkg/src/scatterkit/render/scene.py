"""Scene description: geometry, camera, spot light, material binding.

A scene binds exactly one subsurface material, either a factored model with
its sample set or an analytic dipole. Shading points map onto material
sample indices through a documented projection ("spherical" unwraps around
the mesh centroid, "planar" drops z), then nearest-neighbor lookup among
the sample positions; that binding choice is isolated here so a smarter
parameterization can replace it without touching the renderer core.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Union

import numpy as np
from scipy.spatial import cKDTree

from scatterkit.dipole import DipoleMaterial
from scatterkit.errors import (
    EmptyMeshError,
    InvalidInputError,
    IoFailureError,
    MalformedHeaderError,
    UnboundMaterialError,
)
from scatterkit.factored.archive import load_factored_archive
from scatterkit.factored.model import FactoredBSSRDF, compress
from scatterkit.factored.transform import TransformParams
from scatterkit.materials.archive import load_dipole_material, load_material_archive
from scatterkit.materials.synth import PATCH_EXTENT
from scatterkit.materials.types import (
    CHANNELS,
    DipoleParameters,
    MaterialDescriptor,
    MaterialType,
    SurfaceSampleSet,
)
from scatterkit.render.mesh import TriangleMesh, sphere_mesh, standin_mesh


@dataclass(frozen=True)
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    vfov_deg: float
    width: int
    height: int
    up: np.ndarray = (0.0, 0.0, 1.0)

    def __post_init__(self):
        position = np.asarray(self.position, dtype=np.float64)
        look_at = np.asarray(self.look_at, dtype=np.float64)
        up = np.asarray(self.up, dtype=np.float64)
        if position.shape != (3,) or look_at.shape != (3,) or up.shape != (3,):
            raise InvalidInputError("camera vectors must be 3-D")
        if not (1.0 < float(self.vfov_deg) < 179.0):
            raise InvalidInputError(f"vertical FOV must be in (1, 179), got {self.vfov_deg}")
        if int(self.width) < 1 or int(self.height) < 1:
            raise InvalidInputError("image dimensions must be positive")
        if np.linalg.norm(look_at - position) == 0.0:
            raise InvalidInputError("camera position and look-at coincide")
        for arr in (position, look_at, up):
            arr.setflags(write=False)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "look_at", look_at)
        object.__setattr__(self, "up", up)
        object.__setattr__(self, "vfov_deg", float(self.vfov_deg))
        object.__setattr__(self, "width", int(self.width))
        object.__setattr__(self, "height", int(self.height))

    def basis(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        forward = self.look_at - self.position
        forward = forward / np.linalg.norm(forward)
        right = np.cross(forward, self.up)
        norm = np.linalg.norm(right)
        if norm < 1e-12:
            raise InvalidInputError("camera up vector is parallel to view direction")
        right = right / norm
        true_up = np.cross(right, forward)
        return forward, right, true_up


@dataclass(frozen=True)
class SpotLight:
    position: np.ndarray
    direction: np.ndarray
    cone_angle_deg: float
    intensity: np.ndarray  # W/sr per channel

    def __post_init__(self):
        position = np.asarray(self.position, dtype=np.float64)
        direction = np.asarray(self.direction, dtype=np.float64)
        intensity = np.asarray(self.intensity, dtype=np.float64)
        if position.shape != (3,) or direction.shape != (3,) or intensity.shape != (3,):
            raise InvalidInputError("light vectors must be 3-D / per-channel")
        norm = np.linalg.norm(direction)
        if norm == 0.0:
            raise InvalidInputError("light direction must be nonzero")
        direction = direction / norm
        if not (0.0 < float(self.cone_angle_deg) <= 90.0):
            raise InvalidInputError(
                f"cone angle must be in (0, 90] degrees, got {self.cone_angle_deg}"
            )
        if np.any(intensity < 0.0) or not np.all(np.isfinite(intensity)):
            raise InvalidInputError("intensity must be nonnegative and finite")
        for arr in (position, direction, intensity):
            arr.setflags(write=False)
        object.__setattr__(self, "position", position)
        object.__setattr__(self, "direction", direction)
        object.__setattr__(self, "intensity", intensity)
        object.__setattr__(self, "cone_angle_deg", float(self.cone_angle_deg))

    @property
    def cos_cone(self) -> float:
        return math.cos(math.radians(self.cone_angle_deg))


@dataclass(frozen=True)
class FactoredBinding:
    """A factored model bound together with the sample set it was measured on."""

    factored: FactoredBSSRDF
    samples: SurfaceSampleSet

    def __post_init__(self):
        if self.samples.count != self.factored.n_receivers:
            raise InvalidInputError(
                f"sample count {self.samples.count} does not match factored "
                f"dimensions {self.factored.n_receivers}"
            )

    @property
    def k_used(self) -> int:
        return self.factored.k


@dataclass(frozen=True)
class DipoleBinding:
    material: DipoleMaterial

    @property
    def k_used(self) -> int:
        return 1


MaterialBinding = Union[FactoredBinding, DipoleBinding]

_MAPPINGS = ("spherical", "planar")


@dataclass(frozen=True)
class SceneDescription:
    mesh: TriangleMesh
    camera: Camera
    light: SpotLight
    material: MaterialBinding | None
    background: np.ndarray = (0.0, 0.0, 0.0)
    mapping: str = "spherical"
    descriptor: MaterialDescriptor | None = None

    def __post_init__(self):
        if self.mesh.triangle_count < 1:
            raise EmptyMeshError("scene mesh has no triangles")
        background = np.asarray(self.background, dtype=np.float64)
        if background.shape != (3,) or np.any(background < 0.0):
            raise InvalidInputError("background must be three nonnegative values")
        if self.mapping not in _MAPPINGS:
            raise InvalidInputError(f"mapping must be one of {_MAPPINGS}, got {self.mapping!r}")
        background.setflags(write=False)
        object.__setattr__(self, "background", background)

    def require_material(self) -> MaterialBinding:
        if self.material is None:
            raise UnboundMaterialError("scene has no material bound")
        return self.material

    def sample_index_mapper(self):
        """Callable mapping (m, 3) shading points to material sample indices.

        Projects mesh points into the sample patch (spherical lat-long
        unwrap around the mesh centroid, or planar xy), rescales into the
        sample cloud's bounding box, then takes the Euclidean nearest
        sample. Dipole bindings need no mapper.
        """
        binding = self.require_material()
        if isinstance(binding, DipoleBinding):
            raise InvalidInputError("dipole materials do not use sample indices")
        sample_xy = binding.samples.positions[:, :2]
        tree = cKDTree(sample_xy)
        lo = sample_xy.min(axis=0)
        span = np.where(sample_xy.max(axis=0) - lo > 0.0, sample_xy.max(axis=0) - lo, 1.0)
        mesh_lo, mesh_hi = self.mesh.bounds()
        centroid = 0.5 * (mesh_lo + mesh_hi)
        mapping = self.mapping

        def to_unit(points: np.ndarray) -> np.ndarray:
            if mapping == "spherical":
                rel = points - centroid
                r = np.linalg.norm(rel, axis=1)
                r = np.where(r > 0.0, r, 1.0)
                u = (np.arctan2(rel[:, 1], rel[:, 0]) + math.pi) / (2.0 * math.pi)
                v = np.arccos(np.clip(rel[:, 2] / r, -1.0, 1.0)) / math.pi
                return np.column_stack([u, v])
            span_xy = np.where(mesh_hi[:2] - mesh_lo[:2] > 0.0, mesh_hi[:2] - mesh_lo[:2], 1.0)
            return (points[:, :2] - mesh_lo[:2]) / span_xy

        def mapper(points: np.ndarray) -> np.ndarray:
            unit = to_unit(np.atleast_2d(points))
            _, idx = tree.query(lo + unit * span, k=1)
            return np.asarray(idx, dtype=np.int64)

        return mapper


# Fixed preview poses. One scene for every material keeps previews
# comparable side by side.
PREVIEW_CAMERA_POSITION = (0.0, -4.0, 0.6)
PREVIEW_CAMERA_VFOV_DEG = 40.0
PREVIEW_LIGHT_POSITION = (2.5, -3.0, 3.0)
PREVIEW_LIGHT_CONE_DEG = 30.0
PREVIEW_LIGHT_INTENSITY = (80.0, 80.0, 80.0)
PREVIEW_BACKGROUND = (0.010, 0.012, 0.016)
PREVIEW_SPHERE_LAT_BANDS = 64
PREVIEW_SPHERE_LON_SLICES = 32


def build_preview_scene(
    material: MaterialBinding | None,
    descriptor: MaterialDescriptor | None = None,
    width: int = 256,
    height: int = 256,
) -> SceneDescription:
    """The fixed preview: unit sphere, one spot light, spherical mapping.

    Geometry, camera and light are identical for every material; only the
    binding differs.
    """
    light_pos = np.array(PREVIEW_LIGHT_POSITION)
    return SceneDescription(
        mesh=sphere_mesh(PREVIEW_SPHERE_LAT_BANDS, PREVIEW_SPHERE_LON_SLICES, radius=1.0),
        camera=Camera(
            position=PREVIEW_CAMERA_POSITION,
            look_at=(0.0, 0.0, 0.0),
            vfov_deg=PREVIEW_CAMERA_VFOV_DEG,
            width=width,
            height=height,
        ),
        light=SpotLight(
            position=light_pos,
            direction=-light_pos,
            cone_angle_deg=PREVIEW_LIGHT_CONE_DEG,
            intensity=PREVIEW_LIGHT_INTENSITY,
        ),
        material=material,
        background=PREVIEW_BACKGROUND,
        mapping="spherical",
        descriptor=descriptor,
    )


def _mesh_from_dict(doc: dict) -> TriangleMesh:
    kind = doc.get("type", "sphere")
    if kind == "sphere":
        return sphere_mesh(
            int(doc.get("lat_bands", PREVIEW_SPHERE_LAT_BANDS)),
            int(doc.get("lon_slices", PREVIEW_SPHERE_LON_SLICES)),
            float(doc.get("radius", 1.0)),
        )
    if kind == "standin":
        return standin_mesh()
    if kind == "triangles":
        return TriangleMesh(np.array(doc["vertices"]), np.array(doc["faces"], dtype=np.int32))
    raise InvalidInputError(f"unknown mesh type {kind!r}")


def _binding_from_dict(doc: dict, base_dir: Path):
    def resolve(p):
        p = Path(p)
        return p if p.is_absolute() else base_dir / p

    if "factored" in doc:
        factored = load_factored_archive(resolve(doc["factored"]))
        if "samples" in doc:
            _, samples, _ = load_material_archive(resolve(doc["samples"]))
        else:
            from scatterkit.materials.synth import grid_sample_set

            samples = grid_sample_set(factored.n_receivers)
        return FactoredBinding(factored, samples), None
    if "archive" in doc:
        descriptor, samples, matrices = load_material_archive(resolve(doc["archive"]))
        if "rho" not in doc:
            raise InvalidInputError(
                "scene material with a measured archive needs explicit per-channel"
                " rho (run the optimizer and reference its factored output instead)"
            )
        rho = doc["rho"]
        params = {c: TransformParams(float(r)) for c, r in zip(CHANNELS, rho)}
        k = int(doc.get("k", descriptor.k_parameter))
        return FactoredBinding(compress(matrices, params, k), samples), descriptor
    if "dipole" in doc:
        descriptor = load_dipole_material(resolve(doc["dipole"]))
        return DipoleBinding(DipoleMaterial.from_parameters(descriptor.dipole_params)), descriptor
    if "dipole_params" in doc:
        p = doc["dipole_params"]
        params = DipoleParameters(
            tuple(p["sigma_s_prime"]), tuple(p["sigma_a"]), float(p["eta"])
        )
        name = doc.get("name", "inline dipole")
        descriptor = MaterialDescriptor(name, MaterialType.HOMOGENEOUS, 1, dipole_params=params)
        return DipoleBinding(DipoleMaterial.from_parameters(params)), descriptor
    raise InvalidInputError("scene material needs one of: factored, archive, dipole, dipole_params")


def scene_from_dict(doc: dict, base_dir: str | Path = ".") -> SceneDescription:
    """Build a scene from its JSON document form."""
    if not isinstance(doc, dict):
        raise MalformedHeaderError("scene document must be a JSON object", offset=0)
    for key in ("camera", "light"):
        if key not in doc:
            raise MalformedHeaderError("scene misses required key", field=key)
    cam = doc["camera"]
    light = doc["light"]
    camera = Camera(
        position=np.array(cam["position"], dtype=np.float64),
        look_at=np.array(cam.get("look_at", (0.0, 0.0, 0.0)), dtype=np.float64),
        vfov_deg=float(cam.get("vfov_deg", PREVIEW_CAMERA_VFOV_DEG)),
        width=int(cam.get("width", 256)),
        height=int(cam.get("height", 256)),
        up=np.array(cam.get("up", (0.0, 0.0, 1.0)), dtype=np.float64),
    )
    position = np.array(light["position"], dtype=np.float64)
    if "direction" in light:
        direction = np.array(light["direction"], dtype=np.float64)
    else:
        direction = np.array(light.get("look_at", (0.0, 0.0, 0.0)), dtype=np.float64) - position
    spot = SpotLight(
        position=position,
        direction=direction,
        cone_angle_deg=float(light.get("cone_angle_deg", PREVIEW_LIGHT_CONE_DEG)),
        intensity=np.array(light.get("intensity", PREVIEW_LIGHT_INTENSITY), dtype=np.float64),
    )
    binding, descriptor = (None, None)
    if "material" in doc:
        binding, descriptor = _binding_from_dict(doc["material"], Path(base_dir))
    return SceneDescription(
        mesh=_mesh_from_dict(doc.get("mesh", {"type": "sphere"})),
        camera=camera,
        light=spot,
        material=binding,
        background=np.array(doc.get("background", (0.0, 0.0, 0.0)), dtype=np.float64),
        mapping=doc.get("mapping", "spherical"),
        descriptor=descriptor,
    )


def load_scene(path: str | Path) -> SceneDescription:
    """Read a scene JSON file; relative material paths resolve next to it."""
    path = Path(path)
    try:
        text = path.read_text("utf-8")
    except OSError as exc:
        raise IoFailureError(f"cannot read scene {path}: {exc}") from exc
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise MalformedHeaderError(f"{path}: not valid JSON: {exc}", offset=0)
    return scene_from_dict(doc, path.parent)
