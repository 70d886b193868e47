"""Core material data types.

A measured material is a set of surface samples plus one transport matrix per
color channel. Entry (i, j) of a matrix is the fraction of differential
radiant exitance observed at sample i when sample j is irradiated, so all
entries are nonnegative and the matrix is square with the sample count on
both axes. Arrays are frozen on construction; loaders hand out immutable
structures.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from scatterkit.errors import DimensionMismatchError, InvalidInputError, NegativeEntryError

ALLOWED_K = (1, 5, 10)


class Channel(enum.Enum):
    R = "R"
    G = "G"
    B = "B"


CHANNELS = (Channel.R, Channel.G, Channel.B)


class MaterialType(str, enum.Enum):
    HOMOGENEOUS = "Homogeneous"
    HETEROGENEOUS = "Heterogeneous"


def _frozen_array(values, shape_hint: str, dtype=np.float64) -> np.ndarray:
    arr = np.asarray(values, dtype=dtype)
    if not np.all(np.isfinite(arr)):
        raise InvalidInputError(f"{shape_hint} contains non-finite values")
    arr = arr.copy()
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class SurfaceSampleSet:
    """Sample positions on a surface with per-sample normals and areas.

    positions : (n, 3) float64, meters
    normals   : (n, 3) float64, unit length
    areas     : (n,) float64, square meters, strictly positive
    """

    positions: np.ndarray
    normals: np.ndarray
    areas: np.ndarray

    def __post_init__(self):
        positions = _frozen_array(self.positions, "positions")
        normals = _frozen_array(self.normals, "normals")
        areas = _frozen_array(self.areas, "areas")
        if positions.ndim != 2 or positions.shape[1] != 3:
            raise InvalidInputError(f"positions must be (n, 3), got {positions.shape}")
        n = positions.shape[0]
        if n == 0:
            raise InvalidInputError("sample set must contain at least one sample")
        if normals.shape != (n, 3):
            raise DimensionMismatchError(
                f"normals shape {normals.shape} does not match {n} samples"
            )
        if areas.shape != (n,):
            raise DimensionMismatchError(f"areas shape {areas.shape} does not match {n} samples")
        lengths = np.linalg.norm(normals, axis=1)
        if not np.allclose(lengths, 1.0, atol=1e-6):
            raise InvalidInputError("normals must be unit length")
        if np.any(areas <= 0.0):
            raise InvalidInputError("sample areas must be strictly positive")
        object.__setattr__(self, "positions", positions)
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "areas", areas)

    @property
    def count(self) -> int:
        return self.positions.shape[0]


@dataclass(frozen=True)
class ScatteringMatrix:
    """One channel of measured transport between surface samples.

    values[i, j] couples receiver sample i to source sample j. Entries are
    nonnegative, finite float64.
    """

    channel: Channel
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=np.float64)
        if values.ndim != 2:
            raise InvalidInputError(f"matrix must be 2-D, got ndim={values.ndim}")
        if not np.all(np.isfinite(values)):
            raise InvalidInputError("matrix contains non-finite entries")
        neg = np.argwhere(values < 0.0)
        if neg.size:
            i, j = map(int, neg[0])
            raise NegativeEntryError(
                f"channel {self.channel.value} entry ({i}, {j}) is negative: {values[i, j]!r}"
            )
        values = values.copy()
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @property
    def n_receivers(self) -> int:
        return self.values.shape[0]

    @property
    def n_sources(self) -> int:
        return self.values.shape[1]


def channel_stack(matrices: dict[Channel, ScatteringMatrix]) -> np.ndarray:
    """Stack the three channel matrices into one (3, n_i, n_o) array in R, G, B order."""
    missing = [c.value for c in CHANNELS if c not in matrices]
    if missing:
        raise InvalidInputError(f"missing channels: {missing}")
    shapes = {matrices[c].values.shape for c in CHANNELS}
    if len(shapes) != 1:
        raise DimensionMismatchError(f"channel matrices disagree on shape: {sorted(shapes)}")
    return np.stack([matrices[c].values for c in CHANNELS])


@dataclass(frozen=True)
class DipoleParameters:
    """Bulk optical properties for a homogeneous diffusion material.

    Coefficients are per-channel in 1/m; eta is the relative index of
    refraction.
    """

    sigma_s_prime: tuple[float, float, float]
    sigma_a: tuple[float, float, float]
    eta: float

    def __post_init__(self):
        ssp = tuple(float(v) for v in self.sigma_s_prime)
        sa = tuple(float(v) for v in self.sigma_a)
        if len(ssp) != 3 or len(sa) != 3:
            raise InvalidInputError("sigma_s_prime and sigma_a must each have three channels")
        if any(not math.isfinite(v) or v <= 0.0 for v in ssp):
            raise InvalidInputError(f"sigma_s_prime must be positive and finite, got {ssp}")
        if any(not math.isfinite(v) or v <= 0.0 for v in sa):
            raise InvalidInputError(f"sigma_a must be positive and finite, got {sa}")
        eta = float(self.eta)
        if not (1.0 < eta < 3.0):
            raise InvalidInputError(f"eta must lie in (1, 3), got {eta}")
        object.__setattr__(self, "sigma_s_prime", ssp)
        object.__setattr__(self, "sigma_a", sa)
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class MaterialDescriptor:
    """What the user-facing layers know about a material.

    Invariants:
      * Homogeneous materials always carry k_parameter 1.
      * Heterogeneous materials carry k_parameter in ALLOWED_K.
      * dipole_params is present exactly when the material is homogeneous
        and analytic, i.e. has no measured data file behind it.
    """

    name: str
    material_type: MaterialType
    k_parameter: int = 1
    source: Path | None = None
    dipole_params: DipoleParameters | None = None

    def __post_init__(self):
        if not self.name or not self.name.strip():
            raise InvalidInputError("material name must be non-empty")
        k = int(self.k_parameter)
        if self.material_type is MaterialType.HOMOGENEOUS:
            if k != 1:
                raise InvalidInputError(
                    f"homogeneous material {self.name!r} must have k_parameter 1, got {k}"
                )
        else:
            if k not in ALLOWED_K:
                raise InvalidInputError(
                    f"heterogeneous material {self.name!r} needs k_parameter in "
                    f"{ALLOWED_K}, got {k}"
                )
        analytic = self.source is None
        if self.dipole_params is not None:
            if self.material_type is not MaterialType.HOMOGENEOUS:
                raise InvalidInputError(
                    f"material {self.name!r}: dipole parameters only apply to "
                    "homogeneous materials"
                )
            if not analytic:
                raise InvalidInputError(
                    f"material {self.name!r}: dipole parameters and a data file "
                    "are mutually exclusive"
                )
        elif analytic:
            raise InvalidInputError(
                f"material {self.name!r} has neither a data file nor dipole parameters"
            )
        object.__setattr__(self, "k_parameter", k)
        if self.source is not None:
            object.__setattr__(self, "source", Path(self.source))
