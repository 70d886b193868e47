from scatterkit.materials.types import (
    ALLOWED_K,
    CHANNELS,
    Channel,
    DipoleParameters,
    MaterialDescriptor,
    MaterialType,
    ScatteringMatrix,
    SurfaceSampleSet,
    channel_stack,
)
from scatterkit.materials.synth import Pattern, synthesize_heterogeneous
from scatterkit.materials.archive import (
    load_material_archive,
    load_dipole_material,
    save_material_archive,
)

__all__ = [
    "ALLOWED_K",
    "CHANNELS",
    "Channel",
    "DipoleParameters",
    "MaterialDescriptor",
    "MaterialType",
    "Pattern",
    "ScatteringMatrix",
    "SurfaceSampleSet",
    "channel_stack",
    "load_dipole_material",
    "load_material_archive",
    "save_material_archive",
    "synthesize_heterogeneous",
]
