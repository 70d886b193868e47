"""Dipole diffusion approximation for homogeneous subsurface scattering.

The classical two-source model: a real source buried one mean free path
below the surface and a mirrored virtual source above it, positioned by the
internal diffuse Fresnel reflectance. Serves as the analytic baseline that
measured materials are compared against, and feeds the renderer through the
same matrix interface via ``as_scattering_matrix``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from scatterkit.errors import DomainError, InvalidInputError
from scatterkit.materials.types import (
    CHANNELS,
    Channel,
    DipoleParameters,
    ScatteringMatrix,
    SurfaceSampleSet,
)


def fresnel_diffuse(eta: float) -> float:
    """Internal diffuse Fresnel reflectance, rational approximation.

    F_dr = -1.440/eta^2 + 0.710/eta + 0.668 + 0.0636*eta, valid for
    eta in (1, 3).
    """
    eta = float(eta)
    if not (1.0 < eta < 3.0):
        raise DomainError(f"eta must lie in (1, 3), got {eta}")
    return -1.440 / (eta * eta) + 0.710 / eta + 0.668 + 0.0636 * eta


@dataclass(frozen=True)
class DipoleMaterial:
    """Per-channel bulk coefficients plus the derived dipole geometry.

    sigma_s_prime and sigma_a are (3,) arrays in 1/m. Derived quantities
    (all per channel): sigma_t_prime, alpha_prime, sigma_tr, the real and
    virtual source depths z_r < z_v, and the boundary constant A.
    """

    sigma_s_prime: np.ndarray
    sigma_a: np.ndarray
    eta: float

    def __post_init__(self):
        ssp = np.asarray(self.sigma_s_prime, dtype=np.float64)
        sa = np.asarray(self.sigma_a, dtype=np.float64)
        if ssp.shape != (3,) or sa.shape != (3,):
            raise InvalidInputError("coefficients must be per-channel triples")
        if np.any(ssp <= 0.0) or np.any(sa <= 0.0) or not (
            np.all(np.isfinite(ssp)) and np.all(np.isfinite(sa))
        ):
            raise InvalidInputError("coefficients must be positive and finite")
        eta = float(self.eta)
        f_dr = fresnel_diffuse(eta)  # also enforces eta in (1, 3)

        sigma_t_prime = ssp + sa
        alpha_prime = ssp / sigma_t_prime
        sigma_tr = np.sqrt(3.0 * sa * sigma_t_prime)
        big_a = (1.0 + f_dr) / (1.0 - f_dr)
        z_r = 1.0 / sigma_t_prime
        z_v = z_r * (1.0 + 4.0 * big_a / 3.0)
        assert np.all((0.0 < alpha_prime) & (alpha_prime < 1.0))
        assert np.all(z_v > z_r) and np.all(z_r > 0.0)

        for arr in (ssp, sa, sigma_t_prime, alpha_prime, sigma_tr, z_r, z_v):
            arr.setflags(write=False)
        object.__setattr__(self, "sigma_s_prime", ssp)
        object.__setattr__(self, "sigma_a", sa)
        object.__setattr__(self, "eta", eta)
        object.__setattr__(self, "f_dr", f_dr)
        object.__setattr__(self, "big_a", big_a)
        object.__setattr__(self, "sigma_t_prime", sigma_t_prime)
        object.__setattr__(self, "alpha_prime", alpha_prime)
        object.__setattr__(self, "sigma_tr", sigma_tr)
        object.__setattr__(self, "z_r", z_r)
        object.__setattr__(self, "z_v", z_v)

    @classmethod
    def from_parameters(cls, params: DipoleParameters) -> "DipoleMaterial":
        return cls(np.array(params.sigma_s_prime), np.array(params.sigma_a), params.eta)


def diffuse_reflectance(mat: DipoleMaterial, r) -> np.ndarray:
    """Per-channel R_d at surface distance r (meters), units 1/m^2.

    r may be a scalar or any-shaped array; the result appends the channel
    axis. Strictly positive, strictly decreasing in r.
    """
    r = np.asarray(r, dtype=np.float64)
    if np.any(r < 0.0) or not np.all(np.isfinite(r)):
        raise InvalidInputError("distances must be finite and nonnegative")
    r2 = (r * r)[..., None]
    d_r = np.sqrt(r2 + mat.z_r**2)
    d_v = np.sqrt(r2 + mat.z_v**2)
    st = mat.sigma_tr
    real_term = mat.z_r * (1.0 + st * d_r) * np.exp(-st * d_r) / d_r**3
    virtual_term = mat.z_v * (1.0 + st * d_v) * np.exp(-st * d_v) / d_v**3
    return mat.alpha_prime / (4.0 * math.pi) * (real_term + virtual_term)


def as_scattering_matrix(
    mat: DipoleMaterial, samples: SurfaceSampleSet
) -> dict[Channel, ScatteringMatrix]:
    """Tabulate the dipole over a sample set: T[i, j] = R_d(|x_i - x_j|) * area_j.

    Folding the source area in makes the columns directly usable as
    per-sample transport, same as a measured matrix; reciprocity then holds
    up to the area weights.
    """
    deltas = samples.positions[:, None, :] - samples.positions[None, :, :]
    dist = np.linalg.norm(deltas, axis=2)
    rd = diffuse_reflectance(mat, dist)
    weighted = rd * samples.areas[None, :, None]
    return {c: ScatteringMatrix(c, weighted[:, :, ci]) for ci, c in enumerate(CHANNELS)}
