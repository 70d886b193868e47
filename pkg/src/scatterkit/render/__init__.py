from scatterkit.render.mesh import TriangleMesh, sphere_mesh, standin_mesh
from scatterkit.render.scene import (
    Camera,
    DipoleBinding,
    FactoredBinding,
    SceneDescription,
    SpotLight,
    build_preview_scene,
    load_scene,
    scene_from_dict,
)
from scatterkit.render.sampling import IrradiancePointSet, sample_irradiance_points
from scatterkit.render.gather import gather_exitant_radiance
from scatterkit.render.core import RenderReport, RenderSettings, render
from scatterkit.render.image import ImageFormat, read_pfm, srgb_encode, write_image

__all__ = [
    "Camera",
    "DipoleBinding",
    "FactoredBinding",
    "ImageFormat",
    "IrradiancePointSet",
    "RenderReport",
    "RenderSettings",
    "SceneDescription",
    "SpotLight",
    "TriangleMesh",
    "build_preview_scene",
    "gather_exitant_radiance",
    "load_scene",
    "read_pfm",
    "render",
    "sample_irradiance_points",
    "scene_from_dict",
    "sphere_mesh",
    "srgb_encode",
    "standin_mesh",
    "write_image",
]
