import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from scatterkit.errors import DimensionMismatchError, InvalidInputError, MalformedHeaderError
from scatterkit.factored import (
    ChannelFactors,
    FactoredBSSRDF,
    TransformParams,
    compress,
    evaluate_pair,
    forward_transform,
    inverse_transform,
    load_factored_archive,
    mac_terms_per_eval,
    reconstruct,
    reconstruction_rmse,
    save_factored_archive,
    storage_bytes,
    truncated_svd,
)
from scatterkit.materials import CHANNELS, Channel, Pattern, ScatteringMatrix, synthesize_heterogeneous


def gray_matrices(n=36, pattern=Pattern.CHESSBOARD8, seed=7):
    _, mats = synthesize_heterogeneous(n, pattern, seed=seed)
    return mats


class TestTransform:
    def test_hand_values(self):
        # oracle: ln(1 + 1.0/0.5) = ln 3, ln(1 + 0.25/0.05) = ln 6
        p = TransformParams(0.5)
        y = forward_transform(np.array([0.0, 1.0]), p)
        assert y[0] == 0.0
        assert y[1] == pytest.approx(1.0986122886681098, rel=1e-12)
        y2 = forward_transform(np.array([0.25]), TransformParams(0.05))
        assert y2[0] == pytest.approx(1.791759469228055, rel=1e-12)
        y3 = forward_transform(np.array([123.456]), TransformParams(2.0))
        assert y3[0] == pytest.approx(4.138807918928621, rel=1e-12)

    def test_zero_maps_to_zero_both_ways(self):
        p = TransformParams(0.123)
        assert forward_transform(np.zeros(3), p)[0] == 0.0
        x, clamped = inverse_transform(np.zeros(3), p)
        assert np.all(x == 0.0) and clamped == 0

    def test_monotone(self):
        p = TransformParams(0.7)
        x = np.linspace(0.0, 50.0, 200)
        y = forward_transform(x, p)
        assert np.all(np.diff(y) > 0.0)

    @given(
        rho=st.floats(1e-4, 1e4),
        x=st.lists(st.floats(0.0, 1e6), min_size=1, max_size=32),
    )
    @settings(max_examples=200, deadline=None)
    def test_round_trip_property(self, rho, x):
        p = TransformParams(rho)
        arr = np.array(x)
        back, clamped = inverse_transform(forward_transform(arr, p), p)
        assert clamped == 0
        assert np.allclose(back, arr, rtol=1e-9, atol=1e-12)

    def test_negative_inputs_clamped_and_counted(self):
        p = TransformParams(1.0)
        x, clamped = inverse_transform(np.array([-0.5, 0.0, 1.0, -2.0]), p)
        assert clamped == 2
        assert np.all(x >= 0.0)
        assert x[2] == pytest.approx(math.e - 1.0)

    def test_overflow_raises(self):
        with pytest.raises(OverflowError):
            inverse_transform(np.array([800.0]), TransformParams(1.0))

    def test_rho_bounds_enforced(self):
        with pytest.raises(InvalidInputError):
            TransformParams(0.0)
        with pytest.raises(InvalidInputError):
            TransformParams(1e5)
        with pytest.raises(InvalidInputError):
            TransformParams(1.0, rho_min=2.0, rho_max=1.0)
        TransformParams(1e-4)
        TransformParams(1e4)

    def test_forward_rejects_negative_input(self):
        with pytest.raises(InvalidInputError):
            forward_transform(np.array([-0.1]), TransformParams(1.0))


class TestTruncatedSvd:
    def test_shapes_and_ordering(self):
        rng = np.random.default_rng(0)
        a = rng.random((12, 9))
        u, s, v = truncated_svd(a, 4)
        assert u.shape == (12, 4) and s.shape == (4,) and v.shape == (9, 4)
        assert np.all(np.diff(s) <= 0.0) and np.all(s >= 0.0)
        assert np.allclose(u.T @ u, np.eye(4), atol=1e-10)
        assert np.allclose(v.T @ v, np.eye(4), atol=1e-10)

    def test_matches_independent_lapack_route(self):
        # oracle computed with scipy gesvd (different LAPACK driver)
        rng = np.random.default_rng(42)
        a = rng.random((12, 9))
        u, s, v = truncated_svd(a, 3)
        approx = (u * s) @ v.T
        err = np.sqrt(np.mean((a - approx) ** 2))
        assert err == pytest.approx(0.1647191417877716, rel=1e-9)

    def test_full_rank_is_exact(self):
        rng = np.random.default_rng(1)
        a = rng.random((8, 8))
        u, s, v = truncated_svd(a, 8)
        assert np.allclose((u * s) @ v.T, a, atol=1e-10)

    def test_k_out_of_range(self):
        a = np.ones((4, 6))
        for k in (0, 5, -1):
            with pytest.raises(InvalidInputError):
                truncated_svd(a, k)

    @given(st.integers(0, 2**32 - 1), st.integers(1, 6))
    @settings(max_examples=60, deadline=None)
    def test_eckart_young_beats_random_competitors(self, seed, k):
        # no rank-k matrix may reconstruct better than the truncated SVD
        rng = np.random.default_rng(seed)
        a = rng.random((10, 8))
        u, s, v = truncated_svd(a, k)
        best = np.sqrt(np.mean((a - (u * s) @ v.T) ** 2))
        for _ in range(4):
            b = rng.standard_normal((10, k)) @ rng.standard_normal((k, 8))
            competitor = np.sqrt(np.mean((a - b) ** 2))
            assert best <= competitor + 1e-12

    def test_tail_energy_identity(self):
        # Frobenius error of the truncation equals the discarded singular mass
        rng = np.random.default_rng(9)
        a = rng.random((11, 7))
        full_u, full_s, full_v = truncated_svd(a, 7)
        u, s, v = truncated_svd(a, 2)
        err = np.linalg.norm(a - (u * s) @ v.T, "fro")
        assert err == pytest.approx(np.sqrt(np.sum(full_s[2:] ** 2)), rel=1e-10)


class TestFactoredModel:
    def test_compress_reconstruct_improves_with_k(self):
        mats = gray_matrices(64)
        params = {c: TransformParams(0.05) for c in CHANNELS}
        errs = []
        for k in (1, 5, 10):
            f = compress(mats, params, k)
            rmse, per_channel, clamped = reconstruction_rmse(mats, f)
            errs.append(rmse)
            assert set(per_channel) == set(CHANNELS)
            assert clamped >= 0
        assert errs[0] > errs[1] > errs[2]

    def test_reconstruct_returns_clamp_count(self):
        mats = gray_matrices(64)
        f = compress(mats, {c: TransformParams(0.05) for c in CHANNELS}, 5)
        rec, clamped = reconstruct(f)
        assert clamped >= 0
        for c in CHANNELS:
            assert np.all(rec[c].values >= 0.0)

    def test_evaluate_pair_matches_reconstruction(self):
        mats = gray_matrices(36)
        f = compress(mats, {c: TransformParams(0.02) for c in CHANNELS}, 5)
        rec, _ = reconstruct(f)
        rng = np.random.default_rng(3)
        for _ in range(25):
            i, j = rng.integers(0, 36, size=2)
            c = CHANNELS[rng.integers(0, 3)]
            assert evaluate_pair(f, int(i), int(j), c) == pytest.approx(
                rec[c].values[i, j], abs=1e-12
            )

    def test_evaluate_pair_bounds(self):
        mats = gray_matrices(16)
        f = compress(mats, {c: TransformParams(1.0) for c in CHANNELS}, 1)
        with pytest.raises(IndexError):
            evaluate_pair(f, 16, 0, Channel.R)
        with pytest.raises(IndexError):
            evaluate_pair(f, 0, -1, Channel.R)

    def test_mac_terms_equal_k(self):
        mats = gray_matrices(16)
        for k in (1, 5, 10):
            f = compress(mats, {c: TransformParams(1.0) for c in CHANNELS}, k)
            assert mac_terms_per_eval(f) == k

    def test_any_positive_rank_within_dims_accepted(self):
        # the rank menu {1,5,10} is a material/UI rule, not a property of
        # the factored form itself
        mats = gray_matrices(16)
        f = compress(mats, {c: TransformParams(1.0) for c in CHANNELS}, 3)
        assert f.k == 3 and mac_terms_per_eval(f) == 3

    def test_rank_bounds_enforced(self):
        mats = gray_matrices(16)
        params = {c: TransformParams(1.0) for c in CHANNELS}
        with pytest.raises(InvalidInputError):
            compress(mats, params, 0)
        with pytest.raises(InvalidInputError):
            compress(mats, params, 17)

    def test_factors_validated(self):
        u, s, v = truncated_svd(np.random.default_rng(0).random((6, 6)), 1)
        with pytest.raises(InvalidInputError):
            ChannelFactors(TransformParams(1.0), u * 2.0, s, v)
        with pytest.raises(InvalidInputError):
            ChannelFactors(TransformParams(1.0), u, -s, v)

    def test_per_channel_rho_is_respected(self):
        mats = gray_matrices(36)
        params = {
            Channel.R: TransformParams(0.011),
            Channel.G: TransformParams(0.5),
            Channel.B: TransformParams(17.0),
        }
        f = compress(mats, params, 5)
        assert f.channels[Channel.R].params.rho == 0.011
        assert f.channels[Channel.B].params.rho == 17.0


class TestFactoredArchive:
    def test_round_trip_and_exact_size(self, tmp_path):
        mats = gray_matrices(64)
        f = compress(mats, {c: TransformParams(0.07) for c in CHANNELS}, 5)
        path = tmp_path / "m.gpsf"
        written = save_factored_archive(f, path)
        assert written == path.stat().st_size == storage_bytes(f)
        f2 = load_factored_archive(path)
        assert f2.k == 5
        for c in CHANNELS:
            assert f2.channels[c].params.rho == f.channels[c].params.rho
            assert np.allclose(f2.channels[c].u, f.channels[c].u, atol=1e-6)
        r1, _, _ = reconstruction_rmse(mats, f)
        r2, _, _ = reconstruction_rmse(mats, f2)
        assert r2 == pytest.approx(r1, abs=1e-5)

    def test_payload_arithmetic(self, tmp_path):
        # oracle: payload 3*(k*(2n+1)+1)*4 = 7752 for k=5, n=64
        mats = gray_matrices(64)
        f = compress(mats, {c: TransformParams(0.07) for c in CHANNELS}, 5)
        header_len = storage_bytes(f) - 10 - 7752
        assert header_len > 0
        path = tmp_path / "m.gpsf"
        save_factored_archive(f, path)
        assert path.stat().st_size == 10 + header_len + 7752

    def test_boundary_rho_survives_round_trip(self, tmp_path):
        mats = gray_matrices(16)
        f = compress(mats, {c: TransformParams(1e-4) for c in CHANNELS}, 1)
        path = tmp_path / "m.gpsf"
        save_factored_archive(f, path)
        assert load_factored_archive(path).channels[Channel.R].params.rho == 1e-4

    def test_bad_magic(self, tmp_path):
        path = tmp_path / "bad.gpsf"
        path.write_bytes(b"XXXX" + bytes(20))
        with pytest.raises(MalformedHeaderError) as err:
            load_factored_archive(path)
        assert err.value.offset == 0

    def test_wrong_payload_size(self, tmp_path):
        mats = gray_matrices(16)
        f = compress(mats, {c: TransformParams(1.0) for c in CHANNELS}, 1)
        path = tmp_path / "m.gpsf"
        save_factored_archive(f, path)
        path.write_bytes(path.read_bytes() + b"\x00\x00\x00\x00")
        with pytest.raises(DimensionMismatchError):
            load_factored_archive(path)
