import math

import numpy as np
import pytest
import scipy.integrate

from scatterkit.dipole import DipoleMaterial, as_scattering_matrix, diffuse_reflectance, fresnel_diffuse
from scatterkit.errors import DomainError, InvalidInputError
from scatterkit.factored import forward_transform, TransformParams, truncated_svd
from scatterkit.materials import CHANNELS, Channel, DipoleParameters, SurfaceSampleSet


def marble():
    # marble-like placeholder coefficients, 1/m
    return DipoleMaterial(
        np.array([2190.0, 2620.0, 3000.0]), np.array([2.1, 4.1, 7.1]), 1.5
    )


def flat_patch(n=64, extent=0.1):
    g = int(math.isqrt(n))
    cell = extent / g
    coords = (np.arange(g) + 0.5) * cell
    xs, ys = np.meshgrid(coords, coords)
    pts = np.column_stack([xs.ravel(), ys.ravel(), np.zeros(n)])
    return SurfaceSampleSet(pts, np.tile([0.0, 0.0, 1.0], (n, 1)), np.full(n, cell * cell))


class TestFresnelDiffuse:
    def test_polynomial_oracle_values(self):
        # frozen oracle: -1.440/eta^2 + 0.710/eta + 0.668 + 0.0636*eta
        assert fresnel_diffuse(1.3) == pytest.approx(0.4447628402366864, rel=1e-12)
        assert fresnel_diffuse(1.0001) == pytest.approx(0.0018233239050493844, rel=1e-9)
        assert fresnel_diffuse(1.0001) > 0.0

    def test_result_in_unit_interval(self):
        for eta in np.linspace(1.01, 2.99, 40):
            assert 0.0 < fresnel_diffuse(eta) < 1.0

    @pytest.mark.parametrize("eta", [3.5, 1.0, 0.5, 3.0])
    def test_domain_error_outside_validity(self, eta):
        with pytest.raises(DomainError):
            fresnel_diffuse(eta)


class TestDipoleMaterial:
    def test_derived_quantities_against_oracle(self):
        # frozen from the hand-computed chain for the marble-like material
        m = marble()
        assert m.sigma_tr == pytest.approx([117.51693495, 179.6564221, 253.08344474], rel=1e-8)
        assert m.z_r == pytest.approx([0.00045618, 0.00038108, 0.00033255], abs=1e-8)
        assert m.z_v == pytest.approx([0.00286453, 0.00239295, 0.00208817], abs=1e-8)
        assert np.all(m.z_v > m.z_r) and np.all(m.z_r > 0.0)
        assert np.all((m.alpha_prime > 0.0) & (m.alpha_prime < 1.0))

    def test_invalid_coefficients(self):
        with pytest.raises(InvalidInputError):
            DipoleMaterial(np.array([0.0, 1.0, 1.0]), np.array([1.0, 1.0, 1.0]), 1.5)
        with pytest.raises(DomainError):
            DipoleMaterial(np.array([1.0, 1.0, 1.0]), np.array([1.0, 1.0, 1.0]), 5.0)

    def test_from_parameters(self):
        params = DipoleParameters((2190.0, 2620.0, 3000.0), (2.1, 4.1, 7.1), 1.5)
        m = DipoleMaterial.from_parameters(params)
        assert m.eta == 1.5
        assert m.sigma_s_prime[2] == 3000.0


class TestDiffuseReflectance:
    def test_oracle_values(self):
        # frozen from the independent transcription of the dipole chain
        m = marble()
        assert diffuse_reflectance(m, 0.0005) == pytest.approx(
            [125447.56667318, 133212.22502263, 135664.46676435], rel=1e-8
        )
        assert diffuse_reflectance(m, 0.001) == pytest.approx(
            [34846.69173792, 34330.02694714, 33675.07959133], rel=1e-8
        )
        assert diffuse_reflectance(m, 0.004) == pytest.approx(
            [2202.95695107, 1883.55997151, 1531.70917816], rel=1e-8
        )

    def test_decay_ordering(self):
        m = marble()
        r_1m = diffuse_reflectance(m, 1.0)
        r_10cm = diffuse_reflectance(m, 0.1)
        r_1cm = diffuse_reflectance(m, 0.01)
        assert np.all(r_1m < r_10cm) and np.all(r_10cm < r_1cm)

    def test_strictly_positive_and_decreasing(self):
        m = marble()
        grid = np.logspace(-5, 0, 120)
        rd = diffuse_reflectance(m, grid)
        assert np.all(rd > 0.0)
        assert np.all(np.diff(rd, axis=0) < 0.0)

    def test_vectorized_matches_scalar(self):
        m = marble()
        rs = np.array([0.0, 0.001, 0.02])
        batch = diffuse_reflectance(m, rs)
        for i, r in enumerate(rs):
            assert batch[i] == pytest.approx(diffuse_reflectance(m, float(r)))

    def test_channel_independence(self):
        base = marble()
        bumped = DipoleMaterial(
            base.sigma_s_prime * np.array([2.0, 1.0, 1.0]), base.sigma_a.copy(), base.eta
        )
        r = np.logspace(-4, -1, 20)
        a = diffuse_reflectance(base, r)
        b = diffuse_reflectance(bumped, r)
        assert np.array_equal(a[:, 1], b[:, 1])
        assert np.array_equal(a[:, 2], b[:, 2])
        assert not np.array_equal(a[:, 0], b[:, 0])

    def test_total_albedo_quadrature(self):
        # quadrature oracle: 2*pi*int R_d(r) r dr must land in (0,1) and
        # grow with alpha_prime at fixed eta
        albedos = []
        for alpha in (0.3, 0.6, 0.9):
            st = 1000.0
            m = DipoleMaterial(
                np.full(3, alpha * st), np.full(3, (1.0 - alpha) * st), 1.5
            )
            integrand = lambda r: 2.0 * math.pi * r * float(diffuse_reflectance(m, r)[0])
            total, err = scipy.integrate.quad(integrand, 0.0, 0.5, limit=200)
            assert err < 1e-6
            assert 0.0 < total < 1.0
            albedos.append(total)
        assert albedos[0] < albedos[1] < albedos[2]

    def test_negative_distance_rejected(self):
        with pytest.raises(InvalidInputError):
            diffuse_reflectance(marble(), -0.1)


class TestAsScatteringMatrix:
    def test_definitional_entry(self):
        pts = np.array([[0.0, 0.0, 0.0], [0.0, 0.0, 0.0]])
        normals = np.tile([0.0, 0.0, 1.0], (2, 1))
        samples = SurfaceSampleSet(pts, normals, np.array([3e-5, 3e-5]))
        m = marble()
        mats = as_scattering_matrix(m, samples)
        expected = diffuse_reflectance(m, 0.0)[0] * 3e-5
        assert mats[Channel.R].values[0, 1] == pytest.approx(expected, rel=1e-12)

    def test_reciprocity_up_to_area(self):
        samples = flat_patch(16)
        areas = samples.areas.copy()
        areas[::2] *= 2.0  # non-uniform areas to make the property non-trivial
        samples = SurfaceSampleSet(samples.positions, samples.normals, areas)
        mats = as_scattering_matrix(marble(), samples)
        t = mats[Channel.G].values
        lhs = t / samples.areas[None, :]
        assert np.allclose(lhs, lhs.T, rtol=1e-12, atol=0.0)

    def test_doubling_areas_doubles_columns(self):
        samples = flat_patch(16)
        doubled = SurfaceSampleSet(samples.positions, samples.normals, samples.areas * 2.0)
        a = as_scattering_matrix(marble(), samples)[Channel.B].values
        b = as_scattering_matrix(marble(), doubled)[Channel.B].values
        assert np.allclose(b, 2.0 * a, rtol=1e-12)

    def test_log_transformed_matrix_is_near_rank_one(self):
        # SVD oracle: a spatially uniform translucent material tabulated
        # over a flat 64-sample patch concentrates >= 95% of transformed
        # Frobenius energy in the top mode. This is what makes rank 1 the
        # right default for homogeneous materials. Uses the shipped
        # placeholder wax coefficients; optically sharp materials on this
        # coarse a grid put too much energy into the r=0 spike to qualify.
        samples = flat_patch(64)
        wax = DipoleMaterial(np.array([10.0, 11.0, 12.0]), np.array([0.2, 0.25, 0.3]), 1.4)
        mats = as_scattering_matrix(wax, samples)
        for c in CHANNELS:
            y = forward_transform(mats[c].values, TransformParams(1e-4))
            _, s, _ = truncated_svd(y, min(y.shape))
            energy = s[0] ** 2 / np.sum(s**2)
            assert energy >= 0.95
